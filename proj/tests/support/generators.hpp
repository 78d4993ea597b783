#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace gen {

/// Seeded source of random test inputs.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

  /// Entries in [-1, 1] times a log-uniform scale, with occasional exact zeros.
  Eigen::VectorXd vector(int dim) {
    const double scale = log_uniform(1e-3, 1e3);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(0.0, 1.0) < 0.1 ? 0.0 : scale * uniform(-1.0, 1.0);
    return v;
  }

  Eigen::VectorXd nonzero_vector(int dim) {
    Eigen::VectorXd v = vector(dim);
    while (v.cwiseAbs().maxCoeff() == 0.0) v = vector(dim);
    return v;
  }

  /// Symmetric positive definite matrix with eigenvalues drawn in [m, M],
  /// m and M both attained. Returns the matrix; m and M are written back.
  Eigen::MatrixXd spd(int dim, double& m, double& M) {
    m = log_uniform(0.1, 2.0);
    M = m * log_uniform(1.0, 20.0);
    Eigen::VectorXd eig(dim);
    for (int i = 0; i < dim; ++i) eig[i] = uniform(m, M);
    eig[0] = m;
    eig[dim - 1] = M;
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(
                                  Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return uniform(-1, 1); }))
                                  .householderQ();
    Eigen::MatrixXd a = q * eig.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace gen
