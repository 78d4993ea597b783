#include "gradcert/methods.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gradcert {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

[[noreturn]] void breakdown(const MethodSpec& method, const char* what) {
  throw BreakdownError(std::string(to_string(method.family)) + ": " + what);
}

// Angle-type denominator (h, Bh) or [h, Bh] measured against |h| |Bh|.
void require_acute(const MethodSpec& method, double pairing, double scale) {
  if (!(pairing > kBreakdownThreshold * scale)) {
    breakdown(method, "pairing of f(x) with f'(x)T(x)f(x) is not positive");
  }
}

// Norm-type denominator |v| measured against |J|_F |f|.
void require_nonzero(const MethodSpec& method, double norm_value, double scale) {
  if (!(norm_value > kBreakdownThreshold * scale)) {
    breakdown(method, "step denominator vanished");
  }
}

}  // namespace

Matrix step_operator(const MethodSpec& method, const Matrix& jacobian) {
  if (uses_adjoint(method.family)) return jacobian.transpose();
  return Matrix::Identity(jacobian.rows(), jacobian.cols());
}

StepDirection step_direction(const MethodSpec& method, const SpaceGeometry& space,
                             const Matrix& jacobian, const Vector& fx) {
  validate_method(method, space);
  require_finite(fx, "step_direction");
  if (jacobian.rows() != fx.size() || jacobian.cols() != fx.size()) {
    throw InputError("step_direction: Jacobian shape does not match residual");
  }
  if (!jacobian.allFinite()) breakdown(method, "non-finite Jacobian");
  if (fx.isZero(0.0)) throw InputError("step_direction: residual is zero");

  const double theta = effective_vartheta(method);
  const double jac_scale = jacobian.norm() * fx.norm();

  // Quotients are formed from dot products only, so B = I yields Lambda = 1 exactly.
  StepDirection step;
  if (uses_adjoint(method.family)) {
    step.direction = jacobian.transpose() * fx;
    const double adj = step.direction.norm();
    require_nonzero(method, adj, jac_scale);
    if (method.family == MethodFamily::MinCoError) {
      const Vector b_f = jacobian * step.direction;
      const double bn = b_f.norm();
      require_nonzero(method, bn, jacobian.norm() * adj);
      step.Lambda = step.direction.dot(step.direction) / b_f.dot(b_f);
    } else {
      step.Lambda = fx.dot(fx) / (theta * step.direction.dot(step.direction));
    }
    return step;
  }

  step.direction = fx;
  const Vector b_f = jacobian * fx;

  switch (method.family) {
    case MethodFamily::MinResidual: {
      const double bn = b_f.norm();
      require_nonzero(method, bn, jac_scale);
      const double pairing = fx.dot(b_f);
      require_acute(method, pairing, fx.norm() * bn);
      step.Lambda = pairing / b_f.dot(b_f);
      break;
    }
    case MethodFamily::SteepestDescent:
    case MethodFamily::AltmanSteepestDescent: {
      const double pairing = fx.dot(b_f);
      require_acute(method, pairing, fx.norm() * b_f.norm());
      step.Lambda = fx.dot(fx) / (theta * pairing);
      break;
    }
    case MethodFamily::BanachMinResidual: {
      const double bn = norm(space, b_f);
      require_nonzero(method, bn, operator_norm_bound(space, jacobian) * norm(space, fx));
      const double pairing = semiscalar(space, fx, b_f);
      require_acute(method, pairing, norm(space, fx) * bn);
      step.Lambda = pairing / (space.sigma() * bn * bn);
      break;
    }
    case MethodFamily::BanachSteepestDescent:
    case MethodFamily::BanachAltmanSteepestDescent: {
      const double fn = norm(space, fx);
      const double pairing = semiscalar(space, fx, b_f);
      require_acute(method, pairing, fn * norm(space, b_f));
      step.Lambda = fn * fn / (theta * pairing);
      break;
    }
    default:
      throw Error("step_direction: unhandled family");
  }
  return step;
}

StepDirection step_direction(const MethodSpec& method, const SpaceGeometry& space,
                             const Problem& problem, const Vector& x, const Vector& fx) {
  return step_direction(method, space, problem.eval_jacobian(x), fx);
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Converged: return "converged";
    case Termination::MaxIter: return "max_iter";
    case Termination::LeftBall: return "left_ball";
    case Termination::Breakdown: return "breakdown";
  }
  return "?";
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Residual: return "residual";
    case ViolationKind::Step: return "step";
    case ViolationKind::Ball: return "ball";
  }
  return "?";
}

IterationTrace solve(const Problem& problem, const MethodSpec& method, const SpaceGeometry& space,
                     const StopCriteria& stop, const Certification* certification) {
  validate_method(method, space);
  if (!(stop.res_tol > 0.0)) throw InputError("solve: res_tol must be positive");
  if (problem.x0.size() != problem.dim) throw InputError("solve: x0 has wrong dimension");
  require_finite(problem.x0, "solve: x0");
  if (certification && !certification->certificate.feasible) {
    throw InputError("solve: only feasible certificates can be attached");
  }

  IterationTrace trace;
  trace.problem = problem.name;
  trace.method = method;
  trace.space = space;
  trace.certified = certification != nullptr;
  trace.ball_radius = certification ? certification->certificate.r : problem.R;

  const MajorantCertificate* cert = certification ? &certification->certificate : nullptr;
  const BoundData* bounds = certification ? &certification->bounds : nullptr;

  Vector x = problem.x0;
  std::optional<double> dn;
  if (cert) dn = cert->a;

  for (std::size_t n = 0;; ++n) {
    TraceStep rec;
    rec.n = n;
    rec.x = x;
    rec.dist_from_center = norm(space, Vector(x - problem.x0));
    const Vector fx = problem.eval_f(x);
    if (!fx.allFinite()) {
      trace.steps.push_back(std::move(rec));
      trace.termination = Termination::Breakdown;
      trace.message = "non-finite residual at step " + std::to_string(n);
      return trace;
    }
    rec.res_norm = norm(space, fx);
    if (cert) {
      rec.bound_dn = dn;
      try {
        rec.apost_bound = aposteriori_bound(*cert, *bounds, rec.res_norm);
      } catch (const Error&) {
        rec.apost_bound.reset();
      }
    }

    const auto finish = [&](Termination t, std::string msg) {
      trace.steps.push_back(std::move(rec));
      trace.termination = t;
      trace.message = std::move(msg);
    };

    if (rec.res_norm <= stop.res_tol) {
      finish(Termination::Converged, "residual below tolerance");
      return trace;
    }
    if (n >= stop.max_iter) {
      finish(Termination::MaxIter, "iteration cap reached");
      return trace;
    }
    if (rec.dist_from_center > trace.ball_radius) {
      finish(Termination::LeftBall, "iterate left the ball at step " + std::to_string(n));
      return trace;
    }

    StepDirection step;
    try {
      step = step_direction(method, space, problem.eval_jacobian(x), fx);
    } catch (const BreakdownError& e) {
      finish(Termination::Breakdown, "step " + std::to_string(n) + ": " + e.what());
      return trace;
    }
    const Vector next = x - step.Lambda * step.direction;
    if (!next.allFinite()) {
      finish(Termination::Breakdown, "non-finite iterate produced at step " + std::to_string(n));
      return trace;
    }
    rec.Lambda = step.Lambda;
    rec.step_norm = norm(space, Vector(next - x));
    trace.steps.push_back(std::move(rec));
    x = next;
    if (cert) dn = relax_d(*bounds, cert->sigma, cert->r, *dn);
  }
}

RelaxationReport verify_relaxation(const IterationTrace& trace, const MajorantCertificate& cert,
                                   const BoundData& bounds, double tol) {
  if (trace.steps.empty()) throw InputError("verify_relaxation: empty trace");
  if (!cert.feasible) throw InputError("verify_relaxation: certificate is not feasible");
  const double a = trace.steps.front().res_norm;
  if (std::abs(a - cert.a) > 1e-10 * std::max(1.0, cert.a)) {
    std::ostringstream os;
    os << "verify_relaxation: trace starts at residual " << a << " but certificate has a=" << cert.a;
    throw InputError(os.str());
  }
  if (trace.space.sigma() != cert.sigma) {
    throw InputError("verify_relaxation: trace and certificate use different sigma");
  }

  RelaxationReport report;
  const double r = cert.r;
  const double lt = lambda_theta(bounds, r);
  const double floor = 64.0 * kEps * cert.a;
  const auto& s = trace.steps;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (s[n].dist_from_center > r * (1.0 + tol)) {
      report.violations.push_back({n, ViolationKind::Ball, s[n].dist_from_center, r});
    }
    if (n + 1 >= s.size()) break;
    ++report.checked_pairs;
    const double d = relax_d(bounds, cert.sigma, r, s[n].res_norm);
    if (s[n + 1].res_norm > d * (1.0 + tol) + floor) {
      report.violations.push_back({n, ViolationKind::Residual, s[n + 1].res_norm, d});
    }
    if (s[n].step_norm) {
      const double step_bound = lt * s[n].res_norm;
      if (*s[n].step_norm > step_bound * (1.0 + tol) + floor * lt) {
        report.violations.push_back({n, ViolationKind::Step, *s[n].step_norm, step_bound});
      }
    }
  }
  return report;
}

EmpiricalRates empirical_rates(const IterationTrace& trace, const Vector& x_star) {
  if (trace.steps.empty()) throw InputError("empirical_rates: empty trace");
  std::vector<double> err;
  for (const auto& s : trace.steps) {
    require_same_dim(s.x, x_star, "empirical_rates");
    const double e = norm(trace.space, Vector(s.x - x_star));
    err.push_back(e);
    if (e == 0.0) break;
  }
  EmpiricalRates rates;
  rates.steps_used = err.size() - 1;
  if (err.front() == 0.0) return rates;
  for (std::size_t n = 0; n + 1 < err.size(); ++n) {
    rates.velo = std::max(rates.velo, err[n + 1] / err[n]);
  }
  const double floor = 100.0 * kEps * err.front();
  for (std::size_t n = err.size() - 1; n >= 1; --n) {
    if (err[n] > floor) {
      rates.lexp = std::pow(err[n], 1.0 / static_cast<double>(n));
      break;
    }
  }
  return rates;
}

Vector newton_reference_solution(const Problem& problem, double res_tol, std::size_t max_iter) {
  Vector x = problem.x0;
  Vector fx = problem.eval_f(x);
  double res = fx.norm();
  for (std::size_t it = 0; it < max_iter && res > res_tol; ++it) {
    const Matrix jac = problem.eval_jacobian(x);
    const Vector dx = jac.colPivHouseholderQr().solve(fx);
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      const Vector trial = x - t * dx;
      const Vector f_trial = problem.eval_f(trial);
      const double res_trial = f_trial.norm();
      if (f_trial.allFinite() && res_trial <= (1.0 - 1e-4 * t) * res) {
        x = trial;
        fx = f_trial;
        res = res_trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // rounding floor reached
  }
  if (!(res <= std::max(res_tol, 1e3 * kEps * std::max(1.0, x.norm())))) {
    std::ostringstream os;
    os << "Newton oracle failed on " << problem.name << ": residual " << res;
    throw Error(os.str());
  }
  return x;
}

}  // namespace gradcert
