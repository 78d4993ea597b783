#include "gradcert/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace gradcert {

namespace {

// (sum |x_i|^p)^{1/p}, scaled by max |x_i| to avoid overflow for large p.
double scaled_pnorm(const Vector& x, double p) {
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += std::pow(std::abs(x[i]) / scale, p);
  return scale * std::pow(sum, 1.0 / p);
}

void require_vector(const Vector& x, std::string_view what) {
  if (x.size() < 1) throw InputError(std::string(what) + ": empty vector");
  require_finite(x, what);
}

}  // namespace

SpaceGeometry SpaceGeometry::euclidean() { return {SpaceKind::Euclidean, 2.0, 1.0}; }

SpaceGeometry SpaceGeometry::sequence(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw InputError("l_p space requires finite p >= 2, got " + std::to_string(p));
  }
  return {SpaceKind::SequenceP, p, p - 1.0};
}

SpaceGeometry SpaceGeometry::sequence_with_sigma(double p, double sigma) {
  SpaceGeometry g = sequence(p);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InputError("Bynum constant must be positive and finite");
  }
  g.sigma_ = sigma;
  return g;
}

std::string SpaceGeometry::describe() const {
  std::ostringstream os;
  if (kind_ == SpaceKind::Euclidean) {
    os << "Euclidean";
  } else {
    os << "l_" << p_ << " (sigma=" << sigma_ << ")";
  }
  return os.str();
}

double norm(const SpaceGeometry& space, const Vector& x) {
  require_vector(x, "norm");
  if (space.is_hilbert()) return x.norm();
  return scaled_pnorm(x, space.p());
}

double dual_norm(const SpaceGeometry& space, const Vector& functional) {
  require_vector(functional, "dual_norm");
  if (space.is_hilbert()) return functional.norm();
  return scaled_pnorm(functional, space.dual_exponent());
}

Vector duality_map(const SpaceGeometry& space, const Vector& x) {
  require_vector(x, "duality_map");
  if (space.is_hilbert()) return x;
  const double n = scaled_pnorm(x, space.p());
  Vector j = Vector::Zero(x.size());
  if (n == 0.0) return j;
  // ||x||^{2-p} |x_i|^{p-1} sign(x_i) written as ||x|| (|x_i|/||x||)^{p-1} sign(x_i).
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    j[i] = std::copysign(n * std::pow(std::abs(x[i]) / n, space.p() - 1.0), x[i]);
  }
  return j;
}

double semiscalar(const SpaceGeometry& space, const Vector& x, const Vector& y) {
  require_same_dim(x, y, "semiscalar");
  require_vector(y, "semiscalar");
  if (space.is_hilbert()) {
    require_vector(x, "semiscalar");
    return x.dot(y);
  }
  return duality_map(space, x).dot(y);
}

double operator_norm_bound(const SpaceGeometry& space, const Matrix& b) {
  if (b.size() == 0) return 0.0;
  if (!b.allFinite()) throw InputError("operator_norm_bound: non-finite matrix");
  Eigen::JacobiSVD<Matrix> svd(b);
  const double spectral = svd.singularValues()(0);
  if (space.is_hilbert()) return spectral;
  const double dim = static_cast<double>(std::max(b.rows(), b.cols()));
  return spectral * std::pow(dim, std::abs(0.5 - 1.0 / space.p()));
}

namespace {

class AxiomSampler {
 public:
  AxiomSampler(const SpaceGeometry& space, const AxiomSamplePlan& plan)
      : space_(space), plan_(plan), rng_(plan.seed) {}

  AxiomReport run() {
    report_.worst_margin = std::numeric_limits<double>::infinity();
    report_.worst_bynum_margin = std::numeric_limits<double>::infinity();
    std::uniform_int_distribution<int> dim_dist(plan_.min_dim, plan_.max_dim);
    for (std::size_t s = 0; s < plan_.count; ++s) {
      const int dim = dim_dist(rng_);
      const Vector x = sample_vector(dim);
      const Vector y = sample_vector(dim);
      const Vector y2 = sample_vector(dim);
      const double lam = scalar();
      const double a1 = scalar();
      const double a2 = scalar();
      check_sample(x, y, y2, lam, a1, a2);
      ++report_.samples;
    }
    report_.passed = report_.violations == 0;
    return report_;
  }

 private:
  double scalar() {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> e(-1.0, 1.0);
    return g(rng_) * std::pow(10.0, e(rng_));
  }

  Vector sample_vector(int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double scale = std::pow(10.0, 4.0 * u(rng_) - 2.0);
    const bool sparse = u(rng_) < 0.2;
    Vector v(dim);
    for (int i = 0; i < dim; ++i) {
      v[i] = (sparse && u(rng_) < 0.5) ? 0.0 : scale * g(rng_);
    }
    return v;
  }

  void record(const char* property, double margin, const Vector& x, const Vector& y) {
    if (margin < report_.worst_margin) {
      report_.worst_margin = margin;
      report_.worst_property = property;
    }
    if (margin < -plan_.tolerance) {
      ++report_.violations;
      if (!report_.witness || margin < report_.witness->margin) {
        report_.witness = AxiomWitness{property, x, y, margin};
      }
    }
  }

  static double identity_margin(double lhs, double rhs, double scale) {
    if (scale == 0.0) return lhs == rhs ? 0.0 : -std::numeric_limits<double>::infinity();
    return -std::abs(lhs - rhs) / scale;
  }

  static double inequality_margin(double lhs, double rhs, double scale) {
    if (scale == 0.0) return lhs <= rhs ? 0.0 : -std::numeric_limits<double>::infinity();
    return (rhs - lhs) / scale;
  }

  void check_sample(const Vector& x, const Vector& y, const Vector& y2, double lam, double a1,
                    double a2) {
    const double nx = norm(space_, x);
    const double ny = norm(space_, y);
    const double ny2 = norm(space_, y2);
    const double xy = semiscalar(space_, x, y);

    // (a) [x, x] = ||x||^2
    record("(a) [x,x]=|x|^2", identity_margin(semiscalar(space_, x, x), nx * nx, nx * nx), x, x);

    // (b) [lam x, y] = lam [x, y]
    const double hom_scale = std::abs(lam) * nx * ny;
    record("(b) [lx,y]=l[x,y]",
           identity_margin(semiscalar(space_, Vector(lam * x), y), lam * xy, hom_scale), x, y);

    // (c) [x, a1 y + a2 y2] = a1 [x, y] + a2 [x, y2]
    const double lin_scale = nx * (std::abs(a1) * ny + std::abs(a2) * ny2);
    record("(c) linearity",
           identity_margin(semiscalar(space_, x, Vector(a1 * y + a2 * y2)),
                           a1 * xy + a2 * semiscalar(space_, x, y2), lin_scale),
           x, y);

    // (d) [x, y] <= ||x|| ||y||
    record("(d) [x,y]<=|x||y|", inequality_margin(xy, nx * ny, nx * ny), x, y);

    // (iv) ||x + y||^2 <= ||x||^2 + 2 [x, y] + sigma ||y||^2
    const double sum_norm = norm(space_, Vector(x + y));
    const double sigma = space_.sigma();
    const double bynum_scale = nx * nx + 2.0 * std::abs(xy) + sigma * ny * ny;
    const double bynum = inequality_margin(sum_norm * sum_norm,
                                           nx * nx + 2.0 * xy + sigma * ny * ny, bynum_scale);
    report_.worst_bynum_margin = std::min(report_.worst_bynum_margin, bynum);
    record("(iv) Bynum", bynum, x, y);
  }

  const SpaceGeometry& space_;
  const AxiomSamplePlan& plan_;
  std::mt19937_64 rng_;
  AxiomReport report_;
};

}  // namespace

AxiomReport verify_space_axioms(const SpaceGeometry& space, const AxiomSamplePlan& plan) {
  if (plan.count < 1) throw InputError("verify_space_axioms: sample count must be >= 1");
  if (plan.min_dim < 1 || plan.max_dim < plan.min_dim) {
    throw InputError("verify_space_axioms: invalid dimension range");
  }
  return AxiomSampler(space, plan).run();
}

}  // namespace gradcert
