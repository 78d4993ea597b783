#pragma once

#include "gradcert/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gradcert {

/// A scalar function of the ball radius r.
using RadialFn = std::function<double(double)>;

/// omega(r, t) = L(r) t.
struct LipschitzModulus {
  RadialFn L;
};

/// omega(r, t) = L(r) t^alpha, 0 < alpha <= 1.
struct HolderModulus {
  RadialFn L;
  double alpha = 1.0;
};

/// omega(r, t) tabulated on a t-grid, one row per radius knot.
///
/// A query at radius r uses the row of the smallest knot >= r. Between t-knots
/// omega is linear; past the last knot it continues with the last segment's slope.
/// Requirements: t[0] = 0, every row starts at 0 and is nondecreasing, rows are
/// pointwise nondecreasing in the radius.
struct TabulatedModulus {
  std::vector<double> radii;
  std::vector<double> t;
  std::vector<std::vector<double>> values;
};

using Modulus = std::variant<LipschitzModulus, HolderModulus, TabulatedModulus>;

Modulus lipschitz_modulus(double L);
Modulus lipschitz_modulus(RadialFn L);
Modulus holder_modulus(double L, double alpha);
/// omega = 0: the linear case.
Modulus zero_modulus();

double omega_value(const Modulus& omega, double r, double t);

/// Which quadratic-form argument turns nu into mu.
enum class StepRule {
  MinQuadratic,  ///< Lambda minimizes the quadratic form: mu = sqrt(1 - nu^2 / sigma)
  Altman,        ///< Lambda = |h|^2 / (vartheta [h, Bh]): mu = sqrt(1 - 2/vartheta + sigma/(vartheta nu)^2)
};

struct DirectContraction {
  RadialFn mu;
};

struct NuContraction {
  RadialFn nu;
  StepRule rule = StepRule::MinQuadratic;
  double vartheta = 1.0;
};

/// Scalar bound functions feeding the majorant calculus on the ball B(x0, R).
struct BoundData {
  RadialFn lambda;  ///< bound on the step functional Lambda(x, f(x))
  RadialFn theta;   ///< bound on ||T(x)||
  std::variant<DirectContraction, NuContraction> contraction;
  Modulus omega;
  double R = 1.0;
};

/// Bounds that do not depend on r.
BoundData constant_bounds(double lambda, double theta, double mu, Modulus omega, double R);

struct MajorantSettings {
  double root_tolerance = 1e-12;
  double series_tolerance = 1e-12;  ///< relative geometric-tail tolerance for w
  std::size_t max_series_terms = 1'000'000;
  std::size_t root_scan_points = 1024;
  std::size_t radius_scan_points = 256;
};

/// Checks monotonicity (lambda, theta, mu nondecreasing, nu nonincreasing),
/// nonnegativity and omega(r, 0) = 0 on a uniform grid of [0, R].
/// Throws InputError on the first failure.
void validate_bounds(const BoundData& bounds, double sigma, std::size_t grid = 64);

double mu_from_nu_min(double nu, double sigma);
double mu_from_nu_altman(double nu, double vartheta, double sigma);

/// mu(r), taken directly or derived from nu(r).
double contraction_at(const BoundData& bounds, double sigma, double r);
double lambda_theta(const BoundData& bounds, double r);

/// Omega(r, t) = int_0^t omega(r, tau) d tau, exact for every modulus family.
double big_omega(const BoundData& bounds, double r, double t);

/// d_sigma(r, phi) = mu(r) phi + sigma Omega(r, lambda(r) theta(r) phi).
double relax_d(const BoundData& bounds, double sigma, double r, double phi);

/// n-fold composition of d_sigma(r, .) applied to phi.
double relax_d_iter(const BoundData& bounds, double sigma, double r, double phi, std::size_t n);

/// Smallest positive fixed point of d_sigma(r, .), or nullopt when no positive
/// root lies in (0, Phi_max], Phi_max = 10 max(scale_hint, R, R / (lambda theta)).
/// Throws InfeasibleError when mu(r) >= 1.
std::optional<double> phi_star(const BoundData& bounds, double sigma, double r,
                               double scale_hint = 0.0, const MajorantSettings& settings = {});

/// w_sigma(r, phi) = sum_{n>=0} d_sigma^{(n)}(r, phi). Throws DivergenceError for
/// phi >= phi*(r) or when the series fails to settle within the term cap.
double majorant_w(const BoundData& bounds, double sigma, double r, double phi,
                  const MajorantSettings& settings = {});

/// phi^2 / (phi - d_sigma(r, phi)), the closed-form upper bound on w.
double majorant_w_upper(const BoundData& bounds, double sigma, double r, double phi);

struct MajorantCertificate {
  double r = 0.0;
  double R = 0.0;
  double a = 0.0;
  double sigma = 1.0;
  std::optional<double> phi_star;  ///< nullopt: no positive fixed point in range
  std::optional<double> w_of_a;
  std::optional<double> condition_value;  ///< lambda(r) theta(r) w(r, a)
  bool feasible = false;
  double lambda_theta = 0.0;
  std::optional<double> velo_bound;  ///< d(r, a) / a
  std::optional<double> linear_rate;  ///< mu(r)
  std::string diagnostics;
};

/// Searches the smallest r in [a lambda(0) theta(0), R] with
/// lambda(r) theta(r) w_sigma(r, a) <= r. Infeasibility is reported in the
/// certificate (evaluated at r = R), never thrown.
MajorantCertificate certify(const BoundData& bounds, double sigma, double a,
                            const MajorantSettings& settings = {});

/// lambda(r) theta(r) w_sigma(r, d_sigma^{(n)}(r, a)). Requires a feasible certificate.
double apriori_bound(const MajorantCertificate& cert, const BoundData& bounds, std::size_t n);

/// lambda(r) theta(r) w_sigma(r, res_norm). Throws DivergenceError when
/// res_norm >= phi*(r). Does not require feasibility: the bound holds for any
/// trajectory that stays in B(x0, r).
double aposteriori_bound(const MajorantCertificate& cert, const BoundData& bounds,
                         double res_norm);

struct RateBounds {
  double velo_bound = 0.0;
  double linear_rate = 0.0;
};

RateBounds rate_bounds(const MajorantCertificate& cert, const BoundData& bounds);

/// Bound data together with the certificate computed from it.
struct Certification {
  BoundData bounds;
  MajorantCertificate certificate;
};

}  // namespace gradcert
