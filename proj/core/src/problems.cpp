#include "gradcert/problems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace gradcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class ParamReader {
 public:
  ParamReader(std::string problem, const ProblemParams& params, std::set<std::string> allowed)
      : problem_(std::move(problem)), params_(params) {
    allowed.insert("x0");
    allowed.insert("R");
    for (const auto& [key, value] : params_) {
      if (!allowed.count(key)) throw InputError(problem_ + ": unknown parameter '" + key + "'");
      for (double v : value) {
        if (!std::isfinite(v)) throw InputError(problem_ + ": parameter '" + key + "' is not finite");
      }
    }
  }

  double scalar(const std::string& key, double fallback) const {
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    if (it->second.size() != 1) throw InputError(problem_ + ": parameter '" + key + "' must be a scalar");
    return it->second.front();
  }

  int integer(const std::string& key, int fallback, int min_value) const {
    const double v = scalar(key, fallback);
    if (v != std::floor(v) || v < min_value || v > 1e6) {
      throw InputError(problem_ + ": parameter '" + key + "' must be an integer >= " +
                       std::to_string(min_value));
    }
    return static_cast<int>(v);
  }

  std::optional<Vector> vector(const std::string& key, std::optional<int> dim) const {
    const auto it = params_.find(key);
    if (it == params_.end()) return std::nullopt;
    if (it->second.empty() || (dim && static_cast<int>(it->second.size()) != *dim)) {
      throw InputError(problem_ + ": parameter '" + key + "' has the wrong length");
    }
    return Eigen::Map<const Vector>(it->second.data(), static_cast<Eigen::Index>(it->second.size()));
  }

  /// Applies the common x0 / R overrides.
  void apply_common(Problem& p) const {
    if (auto x0 = vector("x0", p.dim)) p.x0 = *x0;
    p.R = scalar("R", p.R);
    if (!(p.R > 0.0)) throw InputError(problem_ + ": R must be positive");
  }

 private:
  std::string problem_;
  const ProblemParams& params_;
};

double antieigenvalue(double m, double M) { return 2.0 * std::sqrt(m * M) / (m + M); }

/// Divisor of the step bound: sigma for the Banach min-residual rule,
/// vartheta for Altman-type rules, 1 otherwise.
double step_divisor(const MethodSpec& method, const SpaceGeometry& space) {
  if (step_rule(method.family) == StepRule::MinQuadratic) {
    return is_banach(method.family) ? space.sigma() : 1.0;
  }
  return effective_vartheta(method);
}

std::optional<BoundData> spd_linear_bounds(double m, double M, const MethodSpec& method,
                                           const SpaceGeometry& space, double R) {
  if (!space.is_hilbert()) return std::nullopt;
  validate_method(method, space);
  const bool adjoint = uses_adjoint(method.family);
  // B = A for T = I and B = A^2 for T = A^T.
  const double bm = adjoint ? m * m : m;
  const double bM = adjoint ? M * M : M;
  const double nu = antieigenvalue(bm, bM);
  const double lambda = 1.0 / (bm * step_divisor(method, space));
  const double theta = adjoint ? M : 1.0;

  BoundData b;
  b.R = R;
  b.lambda = [lambda](double) { return lambda; };
  b.theta = [theta](double) { return theta; };
  b.contraction = NuContraction{[nu](double) { return nu; }, step_rule(method.family),
                                effective_vartheta(method)};
  b.omega = zero_modulus();
  return b;
}

Matrix finite_difference_jacobian(const Problem& p, const Vector& x) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
  Matrix jac(p.dim, p.dim);
  for (int j = 0; j < p.dim; ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (p.eval_f(xp) - p.eval_f(xm)) / (2.0 * h);
  }
  return jac;
}

Problem build_identity(const ParamReader& in) {
  const int dim = in.integer("dim", 3, 1);
  Vector b = in.vector("b", dim).value_or(Vector::LinSpaced(dim, 1.0, dim));
  Problem p = make_linear_problem(Matrix::Identity(dim, dim), b, Vector::Zero(dim),
                                  2.0 * b.norm() + 1.0, "identity");
  in.apply_common(p);
  return p;
}

Problem build_linear_spd(const ParamReader& in) {
  const double m = in.scalar("m", 1.0);
  const double M = in.scalar("M", 4.0);
  const int dim = in.integer("dim", 2, 1);
  if (!(m > 0.0) || !(M >= m)) throw InputError("linear_spd: need 0 < m <= M");
  if (dim == 1 && m != M) throw InputError("linear_spd: dim 1 needs m == M");
  const Vector diag = dim == 1 ? Vector(Vector::Constant(1, m)) : Vector(Vector::LinSpaced(dim, m, M));
  Problem p = make_linear_problem(diag.asDiagonal(), Vector::Zero(dim), Vector::Ones(dim), 100.0,
                                  "linear_spd");
  in.apply_common(p);
  return p;
}

Problem build_linear_diag(const ParamReader& in) {
  const auto entries = in.vector("entries", std::nullopt);
  if (!entries) throw InputError("linear_diag: parameter 'entries' is required");
  const int dim = static_cast<int>(entries->size());
  const Vector b = in.vector("b", dim).value_or(Vector::Zero(dim));
  Problem p = make_linear_problem(entries->asDiagonal(), b, Vector::Ones(dim), 100.0, "linear_diag");
  in.apply_common(p);
  return p;
}

Problem build_indefinite2d(const ParamReader& in) {
  Problem p = make_linear_problem(Vector{{1.0, -1.0}}.asDiagonal(), Vector::Zero(2),
                                  Vector{{1.0, 0.5}}, 1.0, "indefinite2d");
  in.apply_common(p);
  return p;
}

Problem build_quad2d(const ParamReader& in) {
  Problem p;
  p.name = "quad2d";
  p.dim = 2;
  p.x0 = Vector{{0.5, 0.5}};
  p.R = 1.0;
  in.apply_common(p);
  p.eval_f = [](const Vector& x) {
    return Vector{{x[0] - 0.1 * x[1] * x[1], x[1] - 0.1 * x[0] * x[0]}};
  };
  p.eval_jacobian = [](const Vector& x) {
    Matrix j(2, 2);
    j << 1.0, -0.2 * x[1], -0.2 * x[0], 1.0;
    return j;
  };
  p.known_solution = Vector::Zero(2);
  const double center = p.x0.lpNorm<Eigen::Infinity>();
  const double R = p.R;
  p.certified_bounds = [center, R](const MethodSpec& method, const SpaceGeometry& space) {
    return perturbed_identity_bounds(
        method, space, [center](double r) { return 0.2 * (center + r); },
        [](double) { return 0.2; }, R);
  };
  p.bounds_note =
      "f' = I + E with E = [[0, -0.2 x2], [-0.2 x1, 0]], so ||E||_2 <= 0.2 (||x0||_inf + r) "
      "and ||f'(x) - f'(y)||_2 <= 0.2 ||x - y||_2 (omega Lipschitz, L = 0.2)";
  return p;
}

Problem build_scalar_quad(const ParamReader& in) {
  const double c = in.scalar("c", 0.5);
  if (!(c < 5.0)) throw InputError("scalar_quad: need c < 5 for a real root");
  Problem p;
  p.name = "scalar_quad";
  p.dim = 1;
  p.x0 = Vector::Zero(1);
  p.R = 1.0;
  in.apply_common(p);
  p.eval_f = [c](const Vector& x) { return Vector::Constant(1, x[0] - 0.05 * x[0] * x[0] - c); };
  p.eval_jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, 1.0 - 0.1 * x[0]); };
  // Smaller root of 0.05 x^2 - x + c, written to avoid cancellation.
  p.known_solution = Vector::Constant(1, 2.0 * c / (1.0 + std::sqrt(1.0 - 0.2 * c)));
  const double center = std::abs(p.x0[0]);
  const double R = p.R;
  p.certified_bounds = [center, R](const MethodSpec& method, const SpaceGeometry& space) {
    return perturbed_identity_bounds(
        method, space, [center](double r) { return 0.1 * (center + r); },
        [](double) { return 0.1; }, R);
  };
  p.bounds_note = "f' = 1 - 0.1 x, so |f' - 1| <= 0.1 (|x0| + r) and omega is Lipschitz with L = 0.1";
  return p;
}

Problem build_chandrasekhar(const ParamReader& in) {
  const double c = in.scalar("c", 0.5);
  const int n = in.integer("n", 20, 1);
  if (!(c > 0.0 && c < 1.0)) throw InputError("chandrasekhar: need 0 < c < 1");

  Vector nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = (i + 0.5) / n;
  Matrix K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) K(i, j) = c / (2.0 * n) * nodes[i] / (nodes[i] + nodes[j]);
  }

  Problem p;
  p.name = "chandrasekhar";
  p.dim = n;
  p.x0 = Vector::Ones(n);
  p.R = 2.0;
  in.apply_common(p);
  p.eval_f = [K](const Vector& x) {
    const Vector s = K * x;
    return Vector(x.array() - 1.0 / (1.0 - s.array()));
  };
  p.eval_jacobian = [K](const Vector& x) {
    const Vector s = K * x;
    const Vector g2 = (1.0 / (1.0 - s.array())).square();
    return Matrix(Matrix::Identity(K.rows(), K.cols()) - g2.asDiagonal() * K);
  };

  const Vector kx0 = K * p.x0;
  const Vector row_norms = K.rowwise().norm();
  const double k_norm = Eigen::JacobiSVD<Matrix>(K).singularValues()(0);
  const double max_row = row_norms.maxCoeff();
  // g(r) bounds 1 / (1 - (Kx)_i) on the ball; +inf once (Kx)_i may reach 1.
  const auto g_max = [kx0, row_norms](double r) {
    const double s = (kx0 + r * row_norms).maxCoeff();
    return s < 1.0 ? 1.0 / (1.0 - s) : kInf;
  };
  const double R = p.R;
  p.certified_bounds = [g_max, k_norm, max_row, R](const MethodSpec& method,
                                                   const SpaceGeometry& space) {
    return perturbed_identity_bounds(
        method, space, [g_max, k_norm](double r) { return g_max(r) * g_max(r) * k_norm; },
        [g_max, k_norm, max_row](double r) { return 2.0 * std::pow(g_max(r), 3) * max_row * k_norm; },
        R);
  };
  p.bounds_note =
      "f' = I - diag(g^2) K with g_i = 1/(1 - (Kx)_i) <= g(r) = 1/(1 - max_i((K x0)_i + r ||K_i||)); "
      "||E||_2 <= g(r)^2 ||K||_2 and omega is Lipschitz with L(r) = 2 g(r)^3 max_i ||K_i|| ||K||_2";
  return p;
}

struct Builder {
  const char* name;
  std::set<std::string> keys;
  Problem (*build)(const ParamReader&);
};

const std::vector<Builder>& builders() {
  static const std::vector<Builder> table = {
      {"identity", {"dim", "b"}, build_identity},
      {"linear_spd", {"m", "M", "dim"}, build_linear_spd},
      {"linear_diag", {"entries", "b"}, build_linear_diag},
      {"indefinite2d", {}, build_indefinite2d},
      {"quad2d", {}, build_quad2d},
      {"scalar_quad", {"c"}, build_scalar_quad},
      {"chandrasekhar", {"c", "n"}, build_chandrasekhar},
  };
  return table;
}

}  // namespace

Problem make_problem(const std::string& name, const ProblemParams& params) {
  for (const auto& b : builders()) {
    if (name == b.name) return b.build(ParamReader(name, params, b.keys));
  }
  throw InputError("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  std::vector<std::string> names;
  for (const auto& b : builders()) names.emplace_back(b.name);
  return names;
}

std::vector<Problem> registry() {
  std::vector<Problem> out;
  for (const auto& name : problem_names()) {
    ProblemParams params;
    if (name == "linear_diag") params["entries"] = {1.0, 2.0, 3.0};
    out.push_back(make_problem(name, params));
  }
  return out;
}

Problem make_linear_problem(const Matrix& A, const Vector& b, const Vector& x0, double R,
                            std::string name) {
  if (A.rows() != A.cols() || A.rows() == 0) throw InputError("make_linear_problem: A must be square");
  require_same_dim(b, x0, "make_linear_problem");
  if (b.size() != A.rows()) throw InputError("make_linear_problem: dimension mismatch");
  require_finite(b, "b");
  require_finite(x0, "x0");
  if (!A.allFinite()) throw InputError("make_linear_problem: A is not finite");
  if (!(R > 0.0)) throw InputError("make_linear_problem: R must be positive");

  Problem p;
  p.name = std::move(name);
  p.dim = static_cast<int>(A.rows());
  p.x0 = x0;
  p.R = R;
  p.eval_f = [A, b](const Vector& x) { return Vector(A * x - b); };
  p.eval_jacobian = [A](const Vector&) { return A; };

  Eigen::FullPivLU<Matrix> lu(A);
  if (lu.isInvertible()) p.known_solution = lu.solve(b);

  const bool symmetric = (A - A.transpose()).norm() <= 1e-14 * A.norm();
  double m = 0.0, M = 0.0;
  if (symmetric) {
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues();
    m = eig.minCoeff();
    M = eig.maxCoeff();
  }
  if (symmetric && m > 0.0) {
    p.certified_bounds = [m, M, R](const MethodSpec& method, const SpaceGeometry& space) {
      return spd_linear_bounds(m, M, method, space, R);
    };
    std::ostringstream note;
    note.precision(17);
    note << "A symmetric positive definite with m = " << m << ", M = " << M
         << "; nu is the antieigenvalue of B = A (T = I) or A^2 (T = A^T), lambda = 1/min eig(B) "
            "scaled by the rule divisor, theta = ||T||, omega = 0";
    p.bounds_note = note.str();
  } else {
    p.certified_bounds = [](const MethodSpec&, const SpaceGeometry&) {
      return std::optional<BoundData>{};
    };
    p.bounds_note = "no certified bounds: A is not symmetric positive definite";
  }
  return p;
}

std::optional<BoundData> perturbed_identity_bounds(const MethodSpec& method,
                                                   const SpaceGeometry& space, RadialFn eps,
                                                   RadialFn L, double R) {
  if (!space.is_hilbert()) return std::nullopt;
  validate_method(method, space);
  if (!(eps(R) < 1.0)) return std::nullopt;
  const bool adjoint = uses_adjoint(method.family);
  const double divisor = step_divisor(method, space);

  BoundData b;
  b.R = R;
  if (adjoint) {
    // B = f' f'^T is SPD with spectrum in [(1 - eps)^2, (1 + eps)^2].
    b.lambda = [eps, divisor](double r) {
      const double e = eps(r);
      return 1.0 / ((1.0 - e) * (1.0 - e) * divisor);
    };
    b.theta = [eps](double r) { return 1.0 + eps(r); };
    b.contraction = NuContraction{[eps](double r) {
                                    const double e = eps(r);
                                    return (1.0 - e * e) / (1.0 + e * e);
                                  },
                                  step_rule(method.family), effective_vartheta(method)};
  } else {
    // ||(f' - I) h|| <= eps ||h|| bounds the angle between h and f' h.
    b.lambda = [eps, divisor](double r) { return 1.0 / ((1.0 - eps(r)) * divisor); };
    b.theta = [](double) { return 1.0; };
    b.contraction = NuContraction{[eps](double r) {
                                    const double e = eps(r);
                                    return std::sqrt(1.0 - e * e);
                                  },
                                  step_rule(method.family), effective_vartheta(method)};
  }
  b.omega = lipschitz_modulus(std::move(L));
  return b;
}

JacobianReport validate_jacobian(const Problem& problem, std::uint64_t seed) {
  JacobianReport report;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int k = 0; k < 10; ++k) {
    Vector x = problem.x0;
    if (k > 0) {
      Vector dir(problem.dim);
      for (int i = 0; i < problem.dim; ++i) dir[i] = gauss(rng);
      const double n = dir.norm();
      if (n > 0.0) x += problem.R * std::pow(unif(rng), 1.0 / problem.dim) * dir / n;
    }
    Matrix analytic, numeric;
    try {
      analytic = problem.eval_jacobian(x);
      numeric = finite_difference_jacobian(problem, x);
    } catch (const std::exception& e) {
      report.passed = false;
      report.error = e.what();
      report.witness = JacobianWitness{x, 0, 0, 0.0, 0.0};
      return report;
    }
    if (analytic.rows() != problem.dim || analytic.cols() != problem.dim || !analytic.allFinite() ||
        !numeric.allFinite()) {
      report.passed = false;
      report.error = "Jacobian evaluation returned a malformed or non-finite matrix";
      report.witness = JacobianWitness{x, 0, 0, 0.0, 0.0};
      return report;
    }
    ++report.points_checked;
    const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
    Eigen::Index row = 0, col = 0;
    const double dev = (analytic - numeric).cwiseAbs().maxCoeff(&row, &col) / scale;
    if (dev > report.max_deviation || !report.witness) {
      report.max_deviation = std::max(report.max_deviation, dev);
      report.witness = JacobianWitness{x, static_cast<int>(row), static_cast<int>(col),
                                       analytic(row, col), numeric(row, col)};
    }
  }
  report.passed = report.max_deviation <= kJacobianTolerance;
  return report;
}

}  // namespace gradcert
