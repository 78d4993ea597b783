// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed below; the process exits nonzero if any criterion fails.

#include "gradcert/estimator.hpp"
#include "gradcert/majorant.hpp"
#include "gradcert/methods.hpp"
#include "gradcert/problems.hpp"
#include "gradcert/spaces.hpp"

#include "commands.hpp"
#include "generators.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gradcert;

namespace {

const SpaceGeometry kE = SpaceGeometry::euclidean();

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failures; the first few are kept for the report line.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    std::string d = summary + ", " + std::to_string(checks_) + " checks";
    if (failures_ > 0) d += ", " + std::to_string(failures_) + " failed: " + notes_;
    return {failures_ == 0, d};
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string notes_;
};

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double antieigenvalue(double m, double M) { return 2.0 * std::sqrt(m * M) / (m + M); }

std::vector<double> residual_ratios(const IterationTrace& t) {
  std::vector<double> out;
  for (std::size_t n = 0; n + 1 < t.steps.size(); ++n) {
    if (t.steps[n].res_norm > 0.0) out.push_back(t.steps[n + 1].res_norm / t.steps[n].res_norm);
  }
  return out;
}

struct CertifiedRun {
  const Problem* problem;
  MethodSpec method;
  BoundData bounds;
  MajorantCertificate cert;
  IterationTrace trace;
};

/// Every built-in problem and Hilbert family whose certified bounds admit a feasible certificate.
std::vector<CertifiedRun> certified_runs(const std::vector<Problem>& problems, double res_tol) {
  std::vector<CertifiedRun> out;
  for (const auto& p : problems) {
    for (auto f : kHilbertMethodFamilies) {
      const MethodSpec m{f, 1.0};
      auto b = p.certified_bounds(m, kE);
      if (!b) continue;
      auto c = certify(*b, 1.0, norm(kE, p.eval_f(p.x0)));
      if (!c.feasible) continue;
      const Certification cert{*b, c};
      auto t = solve(p, m, kE, {res_tol, 5000}, &cert);
      out.push_back({&p, m, *b, c, std::move(t)});
    }
  }
  return out;
}

Outcome one_step_exactness() {
  Check ck;
  gen::Gen g(101);
  for (int dim = 1; dim <= 10; ++dim) {
    const Vector b = g.nonzero_vector(dim);
    const Problem p = make_linear_problem(Matrix::Identity(dim, dim), b, Vector::Zero(dim), 1e6, "shift");
    for (auto f : kHilbertMethodFamilies) {
      const auto t = solve(p, {f, 1.0}, kE, {1e-13 * b.norm(), 10});
      const std::string tag = "dim " + std::to_string(dim) + " " + std::string(to_string(f));
      ck.expect(t.termination == Termination::Converged && t.iterations() == 1, tag + " steps");
      ck.expect(t.last().res_norm <= 1e-13 * b.norm(), tag + " residual " + g17(t.last().res_norm));
    }
  }
  return ck.outcome("dims 1-10, all Hilbert families, res <= 1e-13 |b|");
}

Outcome contraction_factors() {
  Check ck;
  double worst_slack = -std::numeric_limits<double>::infinity();
  const auto run = [&](const Matrix& a, double m, double M, const Vector& x0, const std::string& tag) {
    const double nu = antieigenvalue(m, M);
    const Problem p = make_linear_problem(a, Vector::Zero(a.rows()), x0, 1e6);
    const double mr_bound = std::sqrt(1.0 - nu * nu) + 1e-9;
    const double sd_bound = std::sqrt(1.0 / (nu * nu) - 1.0) + 1e-9;
    for (double q : residual_ratios(solve(p, {MethodFamily::MinResidual, 1.0}, kE, {1e-12, 2000}))) {
      worst_slack = std::max(worst_slack, q - mr_bound);
      ck.expect(q <= mr_bound, tag + " MinResidual ratio " + g17(q));
    }
    for (double q : residual_ratios(solve(p, {MethodFamily::SteepestDescent, 1.0}, kE, {1e-12, 2000}))) {
      worst_slack = std::max(worst_slack, q - sd_bound);
      ck.expect(q <= sd_bound, tag + " SteepestDescent ratio " + g17(q));
    }
  };
  run(Vector{{1.0, 4.0}}.asDiagonal(), 1.0, 4.0, Vector{{1.0, 1.0}}, "diag(1,4)");
  run(Vector{{1.0, 4.0}}.asDiagonal(), 1.0, 4.0, Vector{{2.0, 0.25}}, "diag(1,4) antieigenvector");
  gen::Gen g(102);
  for (int k = 0; k < 20; ++k) {
    const int dim = g.integer(2, 5);
    double m = 0.0, M = 0.0;
    const Matrix a = g.spd(dim, m, M);
    run(a, m, M, g.nonzero_vector(dim), "spd #" + std::to_string(k));
  }
  return ck.outcome("diag(1,4) + 20 seeded SPD, max(ratio - bound) = " + g17(worst_slack));
}

Outcome relaxation_invariant(const std::vector<CertifiedRun>& runs) {
  Check ck;
  std::size_t pairs = 0;
  for (const auto& run : runs) {
    const std::string tag = run.problem->name + " " + std::string(to_string(run.method.family));
    const auto rep = verify_relaxation(run.trace, run.cert, run.bounds, 1e-9);
    pairs += rep.checked_pairs;
    ck.expect(rep.verified(), tag + " violations " + std::to_string(rep.violations.size()));
    ck.expect(run.trace.termination == Termination::Converged, tag + " did not converge");
    for (const auto& s : run.trace.steps) {
      ck.expect(s.dist_from_center <= run.cert.r, tag + " left B(x0, r) at n=" + std::to_string(s.n));
    }
  }
  ck.expect(runs.size() >= 20, "only " + std::to_string(runs.size()) + " certified runs");
  return ck.outcome(std::to_string(runs.size()) + " certified runs, " + std::to_string(pairs) + " pairs, tol 1e-9");
}

/// Error enclosure along a trajectory that stays in B(x0, cert.r). The slack
/// is the bound's own value at the reference residual, which covers the
/// reference solution's distance to the true root.
void check_aposteriori(Check& ck, const Problem& p, const MethodSpec& m, const BoundData& b,
                       const MajorantCertificate& c, const Vector& xs, const std::string& tag,
                       std::size_t& checked) {
  const double slack = aposteriori_bound(c, b, norm(kE, p.eval_f(xs)));
  const auto t = solve(p, m, kE, {1e-12, 2000});
  ck.expect(t.termination == Termination::Converged, tag + " did not converge");
  for (const auto& s : t.steps) {
    if (s.dist_from_center > c.r) {
      ck.expect(false, tag + " left the ball");
      break;
    }
    if (!c.phi_star || s.res_norm >= *c.phi_star) continue;  // bound is +inf there
    const double bound = aposteriori_bound(c, b, s.res_norm);
    ++checked;
    ck.expect((s.x - xs).norm() <= bound + slack,
              tag + " n=" + std::to_string(s.n) + " err " + g17((s.x - xs).norm()) + " > " + g17(bound));
  }
}

Outcome aposteriori_enclosure() {
  Check ck;
  std::size_t checked = 0;
  const std::vector<Problem> problems = {make_problem("quad2d"), make_problem("quad2d", {{"x0", {0.2, 0.2}}}),
                                         make_problem("chandrasekhar", {{"c", {0.5}}, {"n", {20}}})};
  for (const auto& p : problems) {
    const Vector xs = newton_reference_solution(p, 1e-13);
    ck.expect(p.eval_f(xs).norm() <= 1e-13, p.name + " Newton residual");
    for (auto f : kHilbertMethodFamilies) {
      const MethodSpec m{f, 1.0};
      const auto b = p.certified_bounds(m, kE);
      if (!b) {
        ck.expect(false, p.name + " has no certified bounds");
        continue;
      }
      // certify() reports at r = R when infeasible; the bound still applies inside that ball.
      const auto c = certify(*b, 1.0, norm(kE, p.eval_f(p.x0)));
      check_aposteriori(ck, p, m, *b, c, xs, p.name + " " + std::string(to_string(f)), checked);
    }
  }
  return ck.outcome("quad2d (two starts) and chandrasekhar(0.5,20), " + std::to_string(checked) +
                    " iterates enclosed");
}

Outcome majorant_identities() {
  Check ck;
  gen::Gen g(105);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double mu = g.uniform(0.0, 0.9), L = g.log_uniform(0.01, 10.0), lt = g.log_uniform(0.1, 10.0);
    const double sigma = g.uniform(1.0, 3.0);
    const auto b = constant_bounds(lt, 1.0, mu, lipschitz_modulus(L), 1.0);
    // mu >= 0 puts phi* below 2 / (sigma L lt^2); that is the search bracket.
    const auto star = phi_star(b, sigma, 0.0, 2.0 / (sigma * L * lt * lt));
    if (!star) {
      ck.expect(false, "no phi* for tuple " + std::to_string(k));
      continue;
    }
    for (int i = 0; i < 10; ++i) {
      const double phi = *star * g.uniform(0.001, 0.999);
      const double w = majorant_w(b, sigma, 0.0, phi);
      const double rhs = phi + majorant_w(b, sigma, 0.0, relax_d(b, sigma, 0.0, phi));
      const double rel = std::abs(w - rhs) / w;
      worst = std::max(worst, rel);
      ck.expect(rel <= 1e-9, "functional equation rel " + g17(rel));
      ck.expect(w <= majorant_w_upper(b, sigma, 0.0, phi), "w above phi^2/(phi - d)");
    }
  }
  return ck.outcome("100 tuples x 10 phi, worst relative defect " + g17(worst));
}

Outcome sigma_degeneracy() {
  Check ck;
  gen::Gen g(106);
  const auto l2 = SpaceGeometry::sequence(2.0);
  ck.expect(l2.sigma() == 1.0, "sigma(l_2) != 1");
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int dim = g.integer(1, 6);
    const Vector x = g.vector(dim), y = g.vector(dim);
    const double scale = 1.0 + x.norm() * y.norm();
    const double ds = std::abs(semiscalar(l2, x, y) - x.dot(y)) / scale;
    worst = std::max(worst, ds);
    ck.expect(ds <= 1e-12, "semiscalar");

    const double mu = g.uniform(0.0, 0.9), L = g.uniform(0.0, 3.0), lt = g.uniform(0.1, 3.0);
    const auto b = constant_bounds(lt, 1.0, mu, lipschitz_modulus(L), 1.0);
    const double phi = g.uniform(0.0, 1.0);
    const double hilbert_d = mu * phi + L * lt * lt * phi * phi / 2.0;
    const double dd = std::abs(relax_d(b, l2.sigma(), 0.0, phi) - hilbert_d) / (1.0 + hilbert_d);
    worst = std::max(worst, dd);
    ck.expect(dd <= 1e-12, "d_sigma");

    double m = 0.0, M = 0.0;
    const int n = g.integer(2, 5);
    const Problem p = make_linear_problem(g.spd(n, m, M), g.vector(n), g.vector(n), 1e6);
    const auto h = solve(p, {MethodFamily::MinResidual, 1.0}, kE, {1e-10, 500});
    const auto bt = solve(p, {MethodFamily::BanachMinResidual, 1.0}, l2, {1e-10, 500});
    if (h.steps.size() != bt.steps.size()) {
      ck.expect(false, "trace lengths differ");
      continue;
    }
    for (std::size_t i = 0; i < h.steps.size(); ++i) {
      const double dx = (h.steps[i].x - bt.steps[i].x).norm() / (1.0 + h.steps[i].x.norm());
      worst = std::max(worst, dx);
      ck.expect(dx <= 1e-12, "BanachMinResidual trace");
    }
  }
  return ck.outcome("20 runs, worst relative difference " + g17(worst));
}

Outcome bynum_sampling() {
  Check ck;
  std::string summary;
  for (double p : {2.0, 3.0, 4.0}) {
    AxiomSamplePlan plan;
    plan.seed = 107;
    plan.count = 100000;
    plan.tolerance = 1e-9;
    const auto rep = verify_space_axioms(SpaceGeometry::sequence(p), plan);
    ck.expect(rep.passed && rep.violations == 0,
              "p=" + g17(p) + " violations " + std::to_string(rep.violations) + " (" + rep.worst_property + ")");
    ck.expect(rep.samples == plan.count, "p=" + g17(p) + " sample count");
    summary += "p=" + g17(p) + " worst bynum margin " + g17(rep.worst_bynum_margin) + ", ";
  }
  AxiomSamplePlan plan;
  plan.seed = 107;
  plan.count = 100000;
  const auto bad = verify_space_axioms(SpaceGeometry::sequence_with_sigma(4.0, 1.5), plan);
  ck.expect(!bad.passed && bad.witness.has_value(), "sigma = 1.5 in l_4 not detected");
  summary += "sigma=1.5 in l_4: " + std::to_string(bad.violations) + " violations";
  return ck.outcome(summary);
}

Outcome mu_formula_oracles() {
  Check ck;
  gen::Gen g(108);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double sigma = g.uniform(1.0, 4.0);
    const double nu = g.uniform(0.05, 1.0);
    const double vartheta = g.uniform(0.05, 2.0);
    const double beta = g.log_uniform(0.1, 10.0);  // |Bh| / |h|
    // Squared residual factor after a step of length lam along h, with [h, Bh] = nu |h||Bh|.
    const auto q = [&](double lam) { return 1.0 - 2.0 * lam * nu * beta + sigma * lam * lam * beta * beta; };
    const double lam_opt = oracle::golden_section_min(q, 0.0, 10.0 / beta, 1e-15);
    const double dmin = std::abs(mu_from_nu_min(nu, sigma) - std::sqrt(q(lam_opt)));
    worst = std::max(worst, dmin);
    ck.expect(dmin <= 1e-10, "min-quadratic diff " + g17(dmin));

    if (nu > std::sqrt(sigma / (2.0 * vartheta))) {
      const double dalt = std::abs(mu_from_nu_altman(nu, vartheta, sigma) - std::sqrt(q(1.0 / (vartheta * nu * beta))));
      worst = std::max(worst, dalt);
      ck.expect(dalt <= 1e-10, "Altman diff " + g17(dalt));
    } else {
      bool rejected = false;
      try {
        mu_from_nu_altman(nu, vartheta, sigma);
      } catch (const ValidityError&) {
        rejected = true;
      }
      ck.expect(rejected, "Altman accepted nu below its validity threshold");
    }
  }
  for (const auto& [vartheta, sigma] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 1.0}, {1.5, 2.0}}) {
    const double edge = std::sqrt(sigma / (2.0 * vartheta));
    bool rejected = false;
    try {
      mu_from_nu_altman(edge, vartheta, sigma);
    } catch (const ValidityError&) {
      rejected = true;
    }
    ck.expect(rejected, "boundary nu accepted");
    const double just_inside = mu_from_nu_altman(std::nextafter(edge, 2.0), vartheta, sigma);
    ck.expect(just_inside < 1.0 && just_inside > 1.0 - 1e-6, "mu just inside the boundary " + g17(just_inside));
  }
  return ck.outcome("1000 tuples, worst |mu - oracle| " + g17(worst));
}

Outcome rate_bounds_check(const std::vector<CertifiedRun>& runs) {
  Check ck;
  double worst_velo = -std::numeric_limits<double>::infinity();
  double worst_lexp = -std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    const Problem& p = *run.problem;
    const std::string tag = p.name + " " + std::string(to_string(run.method.family));
    const Vector xs = p.known_solution ? *p.known_solution : newton_reference_solution(p);
    const auto t = solve(p, run.method, kE, {1e-14, 5000});
    const auto rates = empirical_rates(t, xs);
    const auto rb = rate_bounds(run.cert, run.bounds);
    worst_velo = std::max(worst_velo, rates.velo - rb.velo_bound);
    ck.expect(rates.velo <= rb.velo_bound + 1e-6, tag + " velo " + g17(rates.velo) + " > " + g17(rb.velo_bound));
    if (big_omega(run.bounds, run.cert.r, 1.0) == 0.0) {
      worst_lexp = std::max(worst_lexp, rates.lexp - rb.linear_rate);
      ck.expect(rates.lexp <= rb.linear_rate + 1e-6, tag + " lexp " + g17(rates.lexp) + " > " + g17(rb.linear_rate));
    }
  }
  return ck.outcome(std::to_string(runs.size()) + " certified runs, max(velo - d(r,a)/a) " + g17(worst_velo) +
                    ", max(lexp - mu) on linear " + g17(worst_lexp));
}

int cli_exit(const std::string& cmd, const std::string& config) {
  const std::string path = std::string(GRADCERT_CONFIG_DIR) + "/" + config;
  const char* argv[] = {"gradcert", cmd.c_str(), "--config", path.c_str(), "--fixed-clock"};
  std::ostringstream out, err;
  return cli::run(5, argv, out, err);
}

Outcome negative_controls() {
  Check ck;
  // Understated mu: MinResidual on diag(1,4) from the antieigenvector contracts by exactly 0.6.
  const Problem p = make_problem("linear_spd", {{"x0", {2.0, 0.25}}});
  const auto b = constant_bounds(1.0, 1.0, 0.3, zero_modulus(), p.R);
  const auto c = certify(b, 1.0, norm(kE, p.eval_f(p.x0)));
  ck.expect(c.feasible, "understated-mu certificate infeasible");
  if (c.feasible) {
    const Certification cert{b, c};
    const auto t = solve(p, {MethodFamily::MinResidual, 1.0}, kE, {1e-10, 200}, &cert);
    ck.expect(!verify_relaxation(t, c, b, 1e-9).verified(), "understated mu not detected");
  }
  ck.expect(cli_exit("solve", "linear_spd_understated_mu.json") == cli::kExitViolation, "CLI understated mu exit");

  const Problem ind = make_problem("indefinite2d");
  const SamplePlan plan{9, 16, 128, false};
  const MethodSpec mr{MethodFamily::MinResidual, 1.0};
  ck.expect(estimate_nu_tilde(ind, mr, kE, ind.R, plan).value <= 0.0, "indefinite nu_tilde > 0");
  ck.expect(!estimate_bounds(ind, mr, kE, plan, 4).bounds.has_value(), "indefinite bounds produced");
  ck.expect(cli_exit("estimate", "indefinite_estimate.json") == cli::kExitViolation, "CLI acuteness exit");

  ck.expect(cli_exit("certify", "infeasible_certify.json") == cli::kExitNotConverged, "CLI infeasible certify exit");
  ck.expect(cli_exit("certify", "quad2d_certify.json") == cli::kExitOk, "CLI feasible certify exit");
  return ck.outcome("understated mu, indefinite Jacobian, infeasible certificate");
}

}  // namespace

/// Usage: gradcert_acceptance [--known-failure ID]...
/// The exit status is nonzero when a criterion fails that is not listed as a
/// known failure. Known failures still print FAIL.
int main(int argc, char** argv) {
  std::set<std::string> known_failures;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc) {
      known_failures.insert(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--known-failure ID]...\n", argv[0]);
      return 2;
    }
  }

  struct Criterion {
    const char* id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };

  const std::vector<Problem> builtins = registry();
  std::vector<CertifiedRun> runs;
  const auto prepare = [&] {
    if (runs.empty()) runs = certified_runs(builtins, 1e-10);
  };

  const std::vector<Criterion> criteria = {
      {"A1", "one-step exactness", 1.0, one_step_exactness},
      {"A2", "contraction factors on SPD problems", 5.0, contraction_factors},
      {"A3", "relaxation invariant", 10.0, [&] { prepare(); return relaxation_invariant(runs); }},
      {"A4", "a posteriori bound", 10.0, aposteriori_enclosure},
      {"A5", "majorant identities", 5.0, majorant_identities},
      {"A6", "sigma degeneracy", 10.0, sigma_degeneracy},
      {"A7", "Bynum property sampling", 10.0, bynum_sampling},
      {"A8", "mu-formula oracles", 10.0, mu_formula_oracles},
      {"A9", "rate bounds", 10.0, [&] { prepare(); return rate_bounds_check(runs); }},
      {"A10", "negative controls", 10.0, negative_controls},
  };

  int failed = 0;
  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    const bool known = known_failures.count(c.id) > 0;
    if (!pass) ++failed;
    if (!pass && !known) ++unexpected;
    std::printf("%s %-4s %-38s %7.3fs (budget %gs)  %s%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_s, o.detail.c_str(), in_budget ? "" : " [over budget]",
                !pass && known ? " [known failure]" : "");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return unexpected == 0 ? 0 : 1;
}
