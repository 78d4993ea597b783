#pragma once

#include "gradcert/majorant.hpp"
#include "gradcert/problem.hpp"
#include "gradcert/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gradcert {

/// Named numeric parameters; scalars are one-element vectors.
using ProblemParams = std::map<std::string, std::vector<double>>;

/// Built-in problems by name. Every problem also accepts `x0` and `R`
/// overrides. Unknown names, unknown keys and malformed values throw InputError.
///
///   identity       dim=3, b=(1..dim)            f = x - b, x0 = 0
///   linear_spd     m=1, M=4, dim=2               f = diag(linspace(m, M)) x, x0 = 1
///   linear_diag    entries (required), b=0       f = diag(entries) x - b, x0 = 1
///   indefinite2d                                 f = diag(1, -1) x, x0 = (1, 0.5)
///   quad2d                                       f = (x1 - 0.1 x2^2, x2 - 0.1 x1^2), x0 = (0.5, 0.5)
///   scalar_quad    c=0.5                         f = x - 0.05 x^2 - c, x0 = 0
///   chandrasekhar  c=0.5, n=20                   discretized H-equation, x0 = 1
Problem make_problem(const std::string& name, const ProblemParams& params = {});

/// One instance of every built-in problem with default parameters.
std::vector<Problem> registry();

std::vector<std::string> problem_names();

/// f(x) = A x - b. Certified bounds are attached when A is symmetric positive
/// definite: exact antieigenvalue, exact step bound, omega = 0.
Problem make_linear_problem(const Matrix& A, const Vector& b, const Vector& x0, double R,
                            std::string name = "linear");

/// Bounds for f' = I + E with ||E||_2 <= eps(r) < 1 on B(x0, r) and a Lipschitz
/// Jacobian with constant L(r). Hilbert geometry only; nullopt otherwise or
/// when eps(R) >= 1.
std::optional<BoundData> perturbed_identity_bounds(const MethodSpec& method,
                                                   const SpaceGeometry& space, RadialFn eps,
                                                   RadialFn L, double R);

struct JacobianWitness {
  Vector x;
  int row = 0;
  int col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct JacobianReport {
  bool passed = false;
  std::size_t points_checked = 0;
  double max_deviation = 0.0;  ///< max-entry deviation relative to max(1, max |J|)
  std::optional<JacobianWitness> witness;  ///< worst entry, or the failing point
  std::string error;                        ///< evaluation failure, if any
};

inline constexpr double kJacobianTolerance = 1e-6;

/// Central differences with h = eps^(1/3) (1 + ||x||) at 10 seeded points
/// of the ball (x0 included).
JacobianReport validate_jacobian(const Problem& problem, std::uint64_t seed);

}  // namespace gradcert
