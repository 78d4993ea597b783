#pragma once

#include "gradcert/majorant.hpp"
#include "gradcert/method_spec.hpp"
#include "gradcert/problem.hpp"
#include "gradcert/spaces.hpp"
#include "gradcert/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gradcert {

/// One gradient-like step x+ = x - Lambda * direction, where direction = T(x) f(x).
struct StepDirection {
  double Lambda = 0.0;
  Vector direction;
};

/// Relative threshold below which a step denominator counts as vanished.
inline constexpr double kBreakdownThreshold = 1e-14;

/// T(x): the identity, or the transpose of the Jacobian for adjoint families.
Matrix step_operator(const MethodSpec& method, const Matrix& jacobian);

/// Step functional and direction for the given family at a point with
/// Jacobian `jacobian` and residual `fx` (nonzero).
///
///   MinResidual            (f, Bf) / |Bf|^2                T = I
///   MinCoError             |J^T f|^2 / |J J^T f|^2          T = J^T
///   SteepestDescent        |f|^2 / (f, Bf)                 T = I
///   AltmanSteepestDescent  |f|^2 / (vartheta (f, Bf))      T = I
///   MinError               |f|^2 / |J^T f|^2                T = J^T
///   AltmanMinError         |f|^2 / (vartheta |J^T f|^2)     T = J^T
///   BanachMinResidual      [f, Bf] / (sigma |Bf|^2)        T = I
///   BanachSteepestDescent  |f|^2 / [f, Bf]                 T = I
///   BanachAltman...        |f|^2 / (vartheta [f, Bf])      T = I
///
/// with B = J T. Throws BreakdownError when a denominator vanishes relative to
/// its natural scale or the step size would be nonpositive.
StepDirection step_direction(const MethodSpec& method, const SpaceGeometry& space,
                             const Matrix& jacobian, const Vector& fx);

StepDirection step_direction(const MethodSpec& method, const SpaceGeometry& space,
                             const Problem& problem, const Vector& x, const Vector& fx);

enum class Termination { Converged, MaxIter, LeftBall, Breakdown };

std::string_view to_string(Termination termination);

struct TraceStep {
  std::size_t n = 0;
  Vector x;
  double res_norm = 0.0;
  std::optional<double> Lambda;     ///< step taken from x_n, if any
  std::optional<double> step_norm;  ///< ||x_{n+1} - x_n||
  double dist_from_center = 0.0;
  std::optional<double> bound_dn;     ///< d^{(n)}(r, a)
  std::optional<double> apost_bound;  ///< lambda theta w(r, ||f(x_n)||)
};

struct IterationTrace {
  std::string problem;
  MethodSpec method;
  SpaceGeometry space = SpaceGeometry::euclidean();
  double ball_radius = 0.0;
  bool certified = false;
  std::vector<TraceStep> steps;
  Termination termination = Termination::MaxIter;
  std::string message;

  std::size_t iterations() const { return steps.empty() ? 0 : steps.size() - 1; }
  const TraceStep& last() const { return steps.back(); }
};

struct StopCriteria {
  double res_tol = 1e-10;
  std::size_t max_iter = 1000;
};

/// Runs x_{n+1} = x_n - Lambda(x_n, f(x_n)) T(x_n) f(x_n) from problem.x0.
///
/// Stopping tests are applied in a fixed order at every iterate: convergence
/// (res <= res_tol), iteration cap, ball exit (||x_n - x0|| > r with a
/// certificate, > R without), breakdown. With a (feasible) certification
/// attached, every record also carries d^{(n)}(r, a) and the a posteriori bound.
IterationTrace solve(const Problem& problem, const MethodSpec& method, const SpaceGeometry& space,
                     const StopCriteria& stop, const Certification* certification = nullptr);

enum class ViolationKind { Residual, Step, Ball };

std::string_view to_string(ViolationKind kind);

struct RelaxationViolation {
  std::size_t n = 0;
  ViolationKind kind = ViolationKind::Residual;
  double observed = 0.0;
  double bound = 0.0;
};

struct RelaxationReport {
  std::size_t checked_pairs = 0;
  std::vector<RelaxationViolation> violations;

  bool verified() const { return violations.empty(); }
};

/// Checks every consecutive pair of the trace against
///   ||f(x_{n+1})|| <= d_sigma(r, ||f(x_n)||) (1 + tol)
///   ||x_{n+1} - x_n|| <= lambda(r) theta(r) ||f(x_n)|| (1 + tol)
///   ||x_n - x0|| <= r (1 + tol).
/// Residual comparisons carry an absolute slack of 64 eps ||f(x0)|| for
/// rounding in the evaluation of f.
RelaxationReport verify_relaxation(const IterationTrace& trace, const MajorantCertificate& cert,
                                   const BoundData& bounds, double tol);

struct EmpiricalRates {
  double velo = 0.0;
  double lexp = 0.0;
  std::size_t steps_used = 0;
};

/// velo = max_n e_{n+1} / e_n and lexp = e_N^{1/N} for the last N with
/// e_N > 100 eps e_0, where e_n = ||x_n - x_star||. The sequence is truncated
/// at the first exact hit e_n = 0.
EmpiricalRates empirical_rates(const IterationTrace& trace, const Vector& x_star);

/// High-accuracy reference solution by damped Newton. Used as an oracle for
/// errors and rates; never one of the certified methods.
Vector newton_reference_solution(const Problem& problem, double res_tol = 1e-13,
                                 std::size_t max_iter = 200);

}  // namespace gradcert
