#pragma once

#include "gradcert/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace gradcert {

enum class SpaceKind { Euclidean, SequenceP };

/// Geometry of the ambient space: Euclidean R^n, or finite-dimensional l_p (p >= 2)
/// with Bynum constant sigma.
///
/// For l_p the constant defaults to sigma = p - 1, the sharp constant of
///   ||x + y||^2 <= ||x||^2 + 2 [x, y] + sigma ||y||^2.
/// `sequence_with_sigma` exists to probe wrong constants; it is not meant for solving.
class SpaceGeometry {
 public:
  static SpaceGeometry euclidean();
  static SpaceGeometry sequence(double p);
  static SpaceGeometry sequence_with_sigma(double p, double sigma);

  SpaceKind kind() const { return kind_; }
  double p() const { return p_; }
  double sigma() const { return sigma_; }
  /// Conjugate exponent q with 1/p + 1/q = 1.
  double dual_exponent() const { return p_ / (p_ - 1.0); }
  /// True when the norm comes from an inner product (Euclidean, or l_2).
  bool is_hilbert() const { return kind_ == SpaceKind::Euclidean || p_ == 2.0; }

  std::string describe() const;

  friend bool operator==(const SpaceGeometry&, const SpaceGeometry&) = default;

 private:
  SpaceGeometry(SpaceKind kind, double p, double sigma) : kind_(kind), p_(p), sigma_(sigma) {}

  SpaceKind kind_ = SpaceKind::Euclidean;
  double p_ = 2.0;
  double sigma_ = 1.0;
};

double norm(const SpaceGeometry& space, const Vector& x);

/// Norm of a functional in the dual space (the q-norm for l_p).
double dual_norm(const SpaceGeometry& space, const Vector& functional);

/// Lumer semiscalar product [x, y] = <Jx, y>.
/// Euclidean: the dot product. l_p: ||x||^{2-p} sum |x_i|^{p-1} sign(x_i) y_i.
/// By convention J0 = 0, so [0, y] = 0 for every y.
double semiscalar(const SpaceGeometry& space, const Vector& x, const Vector& y);

/// The (single-valued) duality selection Jx, represented by its coefficient vector.
/// Satisfies dual_norm(Jx) = ||x|| and <Jx, x> = ||x||^2; J0 = 0.
Vector duality_map(const SpaceGeometry& space, const Vector& x);

/// Upper bound on the induced operator norm ||B||_{p->p}.
/// Euclidean: the spectral norm. l_p: ||B||_2 * dim^{|1/2 - 1/p|}.
double operator_norm_bound(const SpaceGeometry& space, const Matrix& b);

struct AxiomSamplePlan {
  std::uint64_t seed = 0;
  std::size_t count = 1000;
  int min_dim = 1;
  int max_dim = 6;
  double tolerance = 1e-9;
};

struct AxiomWitness {
  std::string property;
  Vector x;
  Vector y;
  double margin = 0.0;
};

/// Outcome of sampling properties (a)-(d) of the semiscalar product and the
/// Bynum inequality (iv). Margins are normalized: (rhs - lhs) / scale for the
/// inequalities and -|lhs - rhs| / scale for the identities; a margin below
/// -tolerance is a violation.
struct AxiomReport {
  bool passed = true;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;
  std::string worst_property;
  double worst_bynum_margin = 0.0;
  std::optional<AxiomWitness> witness;
};

AxiomReport verify_space_axioms(const SpaceGeometry& space, const AxiomSamplePlan& plan);

}  // namespace gradcert
