#include "gradcert/estimator.hpp"

#include "gradcert/methods.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace gradcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> first_primes(std::size_t count) {
  std::vector<int> primes;
  for (int c = 2; primes.size() < count; ++c) {
    bool is_prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(c);
  }
  return primes;
}

/// Halton sequence with a seeded Cranley-Patterson shift per coordinate.
class ShiftedHalton {
 public:
  ShiftedHalton(std::size_t dims, std::uint64_t seed) : primes_(first_primes(dims)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < dims; ++i) shift_.push_back(u(rng));
  }

  std::vector<double> next() {
    ++index_;
    std::vector<double> out(primes_.size());
    for (std::size_t d = 0; d < primes_.size(); ++d) {
      double v = radical_inverse(index_, primes_[d]) + shift_[d];
      out[d] = v - std::floor(v);
    }
    return out;
  }

 private:
  static double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base, f = inv, result = 0.0;
    while (i > 0) {
      result += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
      i /= static_cast<std::uint64_t>(base);
      f *= inv;
    }
    return result;
  }

  std::vector<int> primes_;
  std::vector<double> shift_;
  std::uint64_t index_ = 0;
};

Vector normalized(const SpaceGeometry& space, Vector v) {
  const double n = norm(space, v);
  return n > 0.0 ? Vector(v / n) : v;
}

/// Deterministic points in B(x0, r): x0 first, then shifted-Halton points.
std::vector<Vector> ball_points(const Problem& problem, const SpaceGeometry& space, double r,
                                const SamplePlan& plan) {
  std::vector<Vector> pts{problem.x0};
  if (r == 0.0) return pts;
  const int dim = problem.dim;
  ShiftedHalton halton(static_cast<std::size_t>(dim) + 1, plan.seed ^ 0x9e3779b97f4a7c15ULL);
  while (pts.size() < std::max<std::size_t>(plan.n_points, 1)) {
    const auto u = halton.next();
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = 2.0 * u[static_cast<std::size_t>(i)] - 1.0;
    if (norm(space, v) == 0.0) continue;
    const double radius = r * std::pow(u.back(), 1.0 / dim);
    pts.push_back(problem.x0 + radius * normalized(space, v));
  }
  return pts;
}

/// Unit directions: coordinate axes and pairwise diagonals always, plus a
/// uniform half-circle in dimension 2 or shifted-Halton directions above.
std::vector<Vector> direction_set(int dim, const SpaceGeometry& space, const SamplePlan& plan) {
  std::vector<Vector> dirs;
  for (int i = 0; i < dim; ++i) dirs.push_back(Vector::Unit(dim, i));
  if (dim <= 12) {
    for (int i = 0; i < dim; ++i) {
      for (int j = i + 1; j < dim; ++j) {
        dirs.push_back(normalized(space, Vector::Unit(dim, i) + Vector::Unit(dim, j)));
        dirs.push_back(normalized(space, Vector::Unit(dim, i) - Vector::Unit(dim, j)));
      }
    }
  }
  if (dim == 2) {
    const double pi = std::acos(-1.0);
    for (std::size_t k = 1; k < plan.n_dirs; ++k) {
      const double angle = pi * static_cast<double>(k) / static_cast<double>(plan.n_dirs);
      dirs.push_back(normalized(space, Vector{{std::cos(angle), std::sin(angle)}}));
    }
  } else if (dim > 2) {
    ShiftedHalton halton(static_cast<std::size_t>(dim), plan.seed ^ 0x5851f42d4c957f2dULL);
    std::size_t made = 0;
    while (made < plan.n_dirs) {
      const auto u = halton.next();
      Vector v(dim);
      for (int i = 0; i < dim; ++i) v[i] = 2.0 * u[static_cast<std::size_t>(i)] - 1.0;
      if (norm(space, v) == 0.0) continue;
      dirs.push_back(normalized(space, v));
      ++made;
    }
  }
  return dirs;
}

void check_request(const Problem& problem, const MethodSpec& method, const SpaceGeometry& space,
                   double r, const SamplePlan& plan) {
  validate_method(method, space);
  if (plan.n_points < 1 || plan.n_dirs < 1) throw InputError("sample plan needs n_points, n_dirs >= 1");
  if (!(r >= 0.0) || r > problem.R * (1.0 + 1e-12)) throw InputError("radius must lie in [0, R]");
}

Vector project_to_ball(const SpaceGeometry& space, const Vector& x0, double r, Vector x) {
  const double d = norm(space, Vector(x - x0));
  if (d > r && d > 0.0) x = x0 + (r / d) * (x - x0);
  return x;
}

using Objective = std::function<double(const Vector& x, const Vector& h)>;

/// Projected coordinate descent on (x, h) minimizing `objective`.
void refine_minimum(const SpaceGeometry& space, const Vector& x0, double r,
                    const Objective& objective, Vector& x, Vector& h, double& best) {
  double step_h = 0.1;
  double step_x = 0.1 * r;
  for (int sweep = 0; sweep < 200 && step_h > 1e-10; ++sweep) {
    bool improved = false;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vector trial = h;
        trial[i] += sgn * step_h;
        if (norm(space, trial) == 0.0) continue;
        trial = normalized(space, trial);
        const double v = objective(x, trial);
        if (v < best) {
          best = v;
          h = trial;
          improved = true;
        }
      }
    }
    if (r > 0.0) {
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (double sgn : {1.0, -1.0}) {
          Vector trial = x;
          trial[i] += sgn * step_x;
          trial = project_to_ball(space, x0, r, trial);
          const double v = objective(trial, h);
          if (v < best) {
            best = v;
            x = trial;
            improved = true;
          }
        }
      }
    }
    if (!improved) {
      step_h *= 0.5;
      step_x *= 0.5;
    }
  }
}

struct PairingSample {
  double pairing;  // [h, Bh]
  double h_norm;
  double bh_norm;
};

PairingSample pairing_at(const SpaceGeometry& space, const Matrix& b, const Vector& h) {
  const Vector bh = b * h;
  return {semiscalar(space, h, bh), norm(space, h), norm(space, bh)};
}

double nu_ratio(const PairingSample& s) {
  if (s.bh_norm == 0.0 || s.h_norm == 0.0) return 0.0;
  return s.pairing / (s.h_norm * s.bh_norm);
}

double lambda_ratio(const PairingSample& s, const MethodSpec& method, const SpaceGeometry& space) {
  if (step_rule(method.family) == StepRule::MinQuadratic) {
    if (s.bh_norm == 0.0) return kInf;
    const double sigma = is_banach(method.family) ? space.sigma() : 1.0;
    return s.pairing / (sigma * s.bh_norm * s.bh_norm);
  }
  if (!(s.pairing > 0.0)) return kInf;
  return s.h_norm * s.h_norm / (effective_vartheta(method) * s.pairing);
}

Matrix operator_b(const Problem& problem, const MethodSpec& method, const Vector& x) {
  const Matrix j = problem.eval_jacobian(x);
  return j * step_operator(method, j);
}

/// Extremum over sampled (x, h); `sign` = +1 minimizes the ratio, -1 maximizes it.
Estimate extremize(const Problem& problem, const MethodSpec& method, const SpaceGeometry& space,
                   double r, const SamplePlan& plan, EstimateKind kind,
                   const std::function<double(const PairingSample&)>& ratio) {
  const double sign = kind == EstimateKind::UpperEstimateOfInf ? 1.0 : -1.0;
  const auto points = ball_points(problem, space, r, plan);
  auto dirs = direction_set(problem.dim, space, plan);

  Estimate est;
  est.kind = kind;
  double best = kInf;
  for (const Vector& x : points) {
    const Matrix b = operator_b(problem, method, x);
    const Vector fx = problem.eval_f(x);
    auto consider = [&](const Vector& h) {
      const double v = sign * ratio(pairing_at(space, b, h));
      ++est.samples;
      if (v < best || est.arg_x.size() == 0) {
        best = v;
        est.arg_x = x;
        est.arg_h = h;
      }
    };
    for (const Vector& h : dirs) consider(h);
    if (norm(space, fx) > 0.0) consider(normalized(space, fx));
  }

  if (plan.refine && std::isfinite(best)) {
    const Objective objective = [&](const Vector& x, const Vector& h) {
      return sign * ratio(pairing_at(space, operator_b(problem, method, x), h));
    };
    refine_minimum(space, problem.x0, r, objective, est.arg_x, est.arg_h, best);
  }
  est.value = sign * best;
  return est;
}

}  // namespace

std::string_view to_string(EstimateKind kind) {
  return kind == EstimateKind::UpperEstimateOfInf ? "upper estimate (sampled inf)"
                                                  : "lower estimate (sampled sup)";
}

Estimate estimate_nu_tilde(const Problem& problem, const MethodSpec& method,
                           const SpaceGeometry& space, double r, const SamplePlan& plan) {
  check_request(problem, method, space, r, plan);
  return extremize(problem, method, space, r, plan, EstimateKind::UpperEstimateOfInf, nu_ratio);
}

Estimate estimate_lambda_tilde(const Problem& problem, const MethodSpec& method,
                               const SpaceGeometry& space, double r, const SamplePlan& plan) {
  check_request(problem, method, space, r, plan);
  return extremize(problem, method, space, r, plan, EstimateKind::LowerEstimateOfSup,
                   [&](const PairingSample& s) { return lambda_ratio(s, method, space); });
}

Estimate estimate_nu_trajectory(const Problem& problem, const MethodSpec& method,
                                const SpaceGeometry& space, double r, const SamplePlan& plan) {
  check_request(problem, method, space, r, plan);
  Estimate est;
  est.kind = EstimateKind::UpperEstimateOfInf;
  double best = kInf;
  for (const Vector& x : ball_points(problem, space, r, plan)) {
    const Vector fx = problem.eval_f(x);
    if (norm(space, fx) == 0.0) continue;
    const Vector h = normalized(space, fx);
    const double v = nu_ratio(pairing_at(space, operator_b(problem, method, x), h));
    ++est.samples;
    if (v < best) {
      best = v;
      est.arg_x = x;
      est.arg_h = h;
    }
  }
  if (est.samples == 0) throw InputError("estimate_nu_trajectory: f vanishes at every sample");
  est.value = best;
  return est;
}

Estimate estimate_omega_lipschitz(const Problem& problem, const SpaceGeometry& space, double r,
                                  const SamplePlan& plan) {
  if (plan.n_points < 1) throw InputError("sample plan needs n_points >= 1");
  if (!(r > 0.0)) throw InputError("estimate_omega_lipschitz: fewer than 2 distinct samples");
  auto points = ball_points(problem, space, r, plan);
  // Axis-aligned partners: Jacobian differences along one coordinate.
  const std::size_t base = points.size();
  const double shift = 0.25 * r;
  for (std::size_t k = 0; k < base; ++k) {
    for (int i = 0; i < problem.dim; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vector partner = points[k];
        partner[i] += sgn * shift;
        if (norm(space, Vector(partner - problem.x0)) <= r) {
          points.push_back(partner);
          break;
        }
      }
    }
  }
  std::vector<Matrix> jac;
  jac.reserve(points.size());
  for (const auto& p : points) jac.push_back(problem.eval_jacobian(p));

  Estimate est;
  est.kind = EstimateKind::LowerEstimateOfSup;
  est.value = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dist = norm(space, Vector(points[i] - points[j]));
      if (dist == 0.0) continue;
      const double v = operator_norm_bound(space, Matrix(jac[i] - jac[j])) / dist;
      ++est.samples;
      if (v > est.value || est.arg_x.size() == 0) {
        est.value = std::max(est.value, v);
        est.arg_x = points[i];
        est.arg_h = points[j];
      }
    }
  }
  if (est.samples == 0) throw InputError("estimate_omega_lipschitz: fewer than 2 distinct samples");
  return est;
}

Estimate estimate_theta(const Problem& problem, const MethodSpec& method,
                        const SpaceGeometry& space, double r, const SamplePlan& plan) {
  check_request(problem, method, space, r, plan);
  Estimate est;
  est.kind = EstimateKind::LowerEstimateOfSup;
  if (!uses_adjoint(method.family)) {
    est.value = 1.0;
    est.samples = 1;
    est.arg_x = problem.x0;
    return est;
  }
  for (const Vector& x : ball_points(problem, space, r, plan)) {
    const double v = operator_norm_bound(space, step_operator(method, problem.eval_jacobian(x)));
    ++est.samples;
    if (v > est.value || est.arg_x.size() == 0) {
      est.value = std::max(est.value, v);
      est.arg_x = x;
    }
  }
  return est;
}

EstimatedBounds estimate_bounds(const Problem& problem, const MethodSpec& method,
                                const SpaceGeometry& space, const SamplePlan& plan,
                                std::size_t n_radii) {
  if (n_radii < 1) throw InputError("estimate_bounds: n_radii must be >= 1");
  EstimatedBounds out;
  double nu = kInf, lam = 0.0, theta = 0.0, lip = 0.0;
  for (std::size_t k = 1; k <= n_radii; ++k) {
    const double r = problem.R * static_cast<double>(k) / static_cast<double>(n_radii);
    nu = std::min(nu, estimate_nu_tilde(problem, method, space, r, plan).value);
    lam = std::max(lam, estimate_lambda_tilde(problem, method, space, r, plan).value);
    theta = std::max(theta, estimate_theta(problem, method, space, r, plan).value);
    lip = std::max(lip, estimate_omega_lipschitz(problem, space, r, plan).value);
    out.table.push_back({r, nu, lam, theta, lip});
  }

  if (!(nu > 0.0)) {
    out.diagnostics = "acuteness fails: sampled nu_tilde <= 0";
    return out;
  }
  if (!std::isfinite(lam)) {
    out.diagnostics = "lambda_tilde unbounded: [h, Bh] <= 0 at a sample";
    return out;
  }

  const auto table = out.table;
  const auto lookup = [table](double r, double RadiusEstimates::*field) {
    for (const auto& row : table) {
      if (row.r >= r) return row.*field;
    }
    return table.back().*field;
  };
  BoundData b;
  b.R = problem.R;
  b.lambda = [lookup](double r) { return lookup(r, &RadiusEstimates::lambda_tilde); };
  b.theta = [lookup](double r) { return lookup(r, &RadiusEstimates::theta); };
  b.contraction = NuContraction{[lookup](double r) { return lookup(r, &RadiusEstimates::nu_tilde); },
                                step_rule(method.family), effective_vartheta(method)};
  b.omega = lipschitz_modulus([lookup](double r) { return lookup(r, &RadiusEstimates::lipschitz); });
  out.bounds = std::move(b);
  return out;
}

}  // namespace gradcert
