#include "commands.hpp"

#include "gradcert/estimator.hpp"
#include "gradcert/majorant.hpp"
#include "gradcert/methods.hpp"
#include "gradcert/problems.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace gradcert::cli {

namespace {

using ojson = nlohmann::ordered_json;

/// JSON has no infinities; non-finite values become strings.
ojson num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ojson num(const std::optional<double>& v) { return v ? num(*v) : ojson(nullptr); }

ojson vec(const Vector& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

std::string timestamp(const CommandOptions& options) {
  if (options.fixed_clock) return "1970-01-01T00:00:00Z";
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson report_header(const char* command, const RunConfig& config, const CommandOptions& options) {
  ojson j;
  j["command"] = command;
  j["generated_at"] = timestamp(options);
  j["config"] = to_json(config);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  file << text;
  if (!file) throw InputError("failed writing '" + path + "'");
}

void emit_report(const RunConfig& config, ojson& report, int code, std::ostream& out) {
  report["exit_code"] = code;
  const std::string text = report.dump(2) + "\n";
  if (config.report_path.empty()) {
    out << text;
  } else {
    write_text(config.report_path, text);
    out << report["command"].get<std::string>() << ": exit " << code << ", report written to "
        << config.report_path << "\n";
  }
}

Problem load_problem(const RunConfig& config) {
  if (!config.problem) throw InputError("config has no 'problem' section");
  return make_problem(*config.problem, config.params);
}

SamplePlan sample_plan(const RunConfig& config) {
  SamplePlan plan;
  plan.seed = config.seed;
  plan.n_points = config.sample_plan.n_points;
  plan.n_dirs = config.sample_plan.n_dirs;
  plan.refine = config.sample_plan.refine;
  return plan;
}

Modulus build_modulus(const OmegaConfig& o) {
  if (o.kind == "lipschitz") return lipschitz_modulus(o.L);
  if (o.kind == "holder") return holder_modulus(o.L, o.alpha);
  if (o.kind == "tabulated") return TabulatedModulus{o.radii, o.t, o.values};
  return zero_modulus();
}

struct ResolvedBounds {
  std::optional<BoundData> bounds;
  std::string note;
};

ResolvedBounds resolve_bounds(const RunConfig& config, const Problem& problem,
                              const SpaceGeometry& space) {
  ResolvedBounds out;
  const std::string& mode = config.bounds_mode;
  if (mode == "certified") {
    if (problem.certified_bounds) out.bounds = problem.certified_bounds(config.method, space);
    out.note = out.bounds ? problem.bounds_note
                          : "no certified bounds for this method and space";
  } else if (mode == "explicit") {
    const auto& e = *config.explicit_bounds;
    BoundData b;
    b.R = e.R.value_or(problem.R);
    const double lambda = e.lambda, theta = e.theta;
    b.lambda = [lambda](double) { return lambda; };
    b.theta = [theta](double) { return theta; };
    if (e.mu) {
      const double mu = *e.mu;
      b.contraction = DirectContraction{[mu](double) { return mu; }};
    } else {
      const double nu = *e.nu;
      b.contraction = NuContraction{[nu](double) { return nu; }, step_rule(config.method.family),
                                    effective_vartheta(config.method)};
    }
    b.omega = build_modulus(e.omega);
    out.bounds = std::move(b);
    out.note = "explicit bounds from the config";
  } else if (mode == "estimated") {
    auto est = estimate_bounds(problem, config.method, space, sample_plan(config),
                               config.sample_plan.n_radii);
    out.bounds = std::move(est.bounds);
    out.note = out.bounds ? "sampled estimates (not guaranteed bounds)" : est.diagnostics;
  } else {
    out.note = "bounds disabled";
  }
  if (out.bounds) validate_bounds(*out.bounds, space.sigma());
  return out;
}

ojson certificate_json(const MajorantCertificate& c, const BoundData& bounds, std::size_t terms) {
  ojson j;
  j["feasible"] = c.feasible;
  j["r"] = num(c.r);
  j["R"] = num(c.R);
  j["a"] = num(c.a);
  j["sigma"] = num(c.sigma);
  j["phi_star"] = c.phi_star ? num(*c.phi_star) : ojson("none");
  j["w_of_a"] = num(c.w_of_a);
  j["condition_value"] = num(c.condition_value);
  j["lambda_theta"] = num(c.lambda_theta);
  j["velo_bound"] = num(c.velo_bound);
  j["linear_rate"] = num(c.linear_rate);
  j["diagnostics"] = c.diagnostics;
  ojson table = ojson::array();
  if (c.feasible) {
    for (std::size_t n = 0; n <= terms; ++n) {
      table.push_back({{"n", n},
                       {"d_n", num(relax_d_iter(bounds, c.sigma, c.r, c.a, n))},
                       {"error_bound", num(apriori_bound(c, bounds, n))}});
    }
  }
  j["apriori"] = table;
  return j;
}

ojson problem_json(const Problem& p) {
  return {{"name", p.name}, {"dim", p.dim}, {"R", num(p.R)}, {"x0", vec(p.x0)}};
}

ojson estimate_json(const Estimate& e) {
  return {{"value", num(e.value)},
          {"label", std::string(to_string(e.kind))},
          {"samples", e.samples},
          {"arg_x", vec(e.arg_x)},
          {"arg_h", vec(e.arg_h)}};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::string trace_csv(const IterationTrace& trace) {
  std::string out = "n,res_norm,lambda_n,step_norm,dist_from_center,bound_dn,apost_bound\n";
  for (const auto& s : trace.steps) {
    out += std::to_string(s.n) + "," + fmt(s.res_norm) + "," + fmt(s.Lambda) + "," +
           fmt(s.step_norm) + "," + fmt(s.dist_from_center) + "," + fmt(s.bound_dn) + "," +
           fmt(s.apost_bound) + "\n";
  }
  return out;
}

int cmd_solve(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const Problem problem = load_problem(config);
  const SpaceGeometry space = make_space(config);
  validate_method(config.method, space);
  const auto resolved = resolve_bounds(config, problem, space);

  ojson report = report_header("solve", config, options);
  report["problem"] = problem_json(problem);
  report["bounds"] = {{"mode", config.bounds_mode},
                      {"available", resolved.bounds.has_value()},
                      {"note", resolved.note}};

  std::optional<Certification> certification;
  report["certificate"] = nullptr;
  if (resolved.bounds) {
    const double a = norm(space, problem.eval_f(problem.x0));
    try {
      Certification c{*resolved.bounds, certify(*resolved.bounds, space.sigma(), a)};
      report["certificate"] = certificate_json(c.certificate, c.bounds, config.apriori_terms);
      if (c.certificate.feasible) certification = std::move(c);
    } catch (const Error& e) {
      report["certificate"] = {{"feasible", false}, {"diagnostics", e.what()}};
    }
  }

  const StopCriteria stop{config.res_tol, config.max_iter};
  const IterationTrace trace =
      solve(problem, config.method, space, stop, certification ? &*certification : nullptr);

  int code = kExitOk;
  switch (trace.termination) {
    case Termination::Converged: code = kExitOk; break;
    case Termination::MaxIter:
    case Termination::LeftBall: code = kExitNotConverged; break;
    case Termination::Breakdown: code = kExitBreakdown; break;
  }

  report["result"] = {{"termination", std::string(to_string(trace.termination))},
                      {"message", trace.message},
                      {"certified", trace.certified},
                      {"ball_radius", num(trace.ball_radius)},
                      {"iterations", trace.iterations()},
                      {"final_res_norm", num(trace.last().res_norm)},
                      {"final_x", vec(trace.last().x)}};

  report["relaxation"] = nullptr;
  if (certification) {
    const auto rel = verify_relaxation(trace, certification->certificate, certification->bounds, 1e-9);
    ojson violations = ojson::array();
    for (const auto& v : rel.violations) {
      violations.push_back({{"n", v.n},
                            {"kind", std::string(to_string(v.kind))},
                            {"observed", num(v.observed)},
                            {"bound", num(v.bound)}});
    }
    report["relaxation"] = {{"checked_pairs", rel.checked_pairs},
                            {"verified", rel.verified()},
                            {"violations", violations}};
    if (code == kExitOk && !rel.verified()) code = kExitViolation;
  }

  if (!config.trace_path.empty()) write_text(config.trace_path, trace_csv(trace));
  emit_report(config, report, code, out);
  return code;
}

int cmd_certify(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const Problem problem = load_problem(config);
  const SpaceGeometry space = make_space(config);
  validate_method(config.method, space);
  const auto resolved = resolve_bounds(config, problem, space);
  if (!resolved.bounds) throw InputError("certify: " + resolved.note);

  ojson report = report_header("certify", config, options);
  report["problem"] = problem_json(problem);
  report["bounds"] = {{"mode", config.bounds_mode}, {"note", resolved.note}};
  const double a = norm(space, problem.eval_f(problem.x0));
  int code = kExitOk;
  try {
    const auto cert = certify(*resolved.bounds, space.sigma(), a);
    report["certificate"] = certificate_json(cert, *resolved.bounds, config.apriori_terms);
    if (!cert.feasible) code = kExitNotConverged;
  } catch (const Error& e) {
    report["certificate"] = {{"feasible", false}, {"a", num(a)}, {"diagnostics", e.what()}};
    code = kExitNotConverged;
  }
  emit_report(config, report, code, out);
  return code;
}

int cmd_estimate(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const Problem problem = load_problem(config);
  const SpaceGeometry space = make_space(config);
  const double r = config.sample_plan.radius.value_or(problem.R);
  const SamplePlan plan = sample_plan(config);

  const auto nu = estimate_nu_tilde(problem, config.method, space, r, plan);
  const auto lam = estimate_lambda_tilde(problem, config.method, space, r, plan);
  const auto theta = estimate_theta(problem, config.method, space, r, plan);
  const auto omega = estimate_omega_lipschitz(problem, space, r, plan);

  ojson report = report_header("estimate", config, options);
  report["problem"] = problem_json(problem);
  report["radius"] = num(r);
  report["sigma"] = num(space.sigma());
  report["nu_tilde"] = estimate_json(nu);
  report["lambda_tilde"] = estimate_json(lam);
  try {
    report["nu_trajectory"] = estimate_json(estimate_nu_trajectory(problem, config.method, space, r, plan));
  } catch (const Error& e) {
    report["nu_trajectory"] = {{"value", nullptr}, {"error", e.what()}};
  }
  report["theta"] = estimate_json(theta);
  report["omega_lipschitz"] = estimate_json(omega);

  const bool acute = nu.value > 0.0;
  report["acute"] = acute;
  const double vartheta = config.method.vartheta;
  const double threshold = std::sqrt(space.sigma() / (2.0 * vartheta));
  ojson altman{{"vartheta", num(vartheta)}, {"threshold", num(threshold)}};
  ojson mu{{"min_quadratic", nullptr}};
  if (acute) {
    mu["min_quadratic"] = num(mu_from_nu_min(std::min(nu.value, 1.0), space.sigma()));
    try {
      altman["value"] = num(mu_from_nu_altman(std::min(nu.value, 1.0), vartheta, space.sigma()));
      altman["valid"] = true;
    } catch (const ValidityError& e) {
      altman["value"] = nullptr;
      altman["valid"] = false;
      altman["note"] = e.what();
    }
  } else {
    altman["value"] = nullptr;
    altman["valid"] = false;
    report["diagnostics"] = "acuteness fails: sampled nu_tilde <= 0";
  }
  mu["altman"] = altman;
  report["mu"] = mu;

  const int code = acute ? kExitOk : kExitViolation;
  emit_report(config, report, code, out);
  return code;
}

int cmd_verify_space(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const SpaceGeometry space = make_space(config);
  AxiomSamplePlan plan;
  plan.seed = config.seed;
  plan.count = config.verify_space.samples;
  plan.min_dim = config.verify_space.min_dim;
  plan.max_dim = config.verify_space.max_dim;
  plan.tolerance = config.verify_space.tolerance;
  const auto rep = verify_space_axioms(space, plan);

  ojson report = report_header("verify-space", config, options);
  report["space"] = space.describe();
  report["passed"] = rep.passed;
  report["samples"] = rep.samples;
  report["violations"] = rep.violations;
  report["worst_margin"] = num(rep.worst_margin);
  report["worst_property"] = rep.worst_property;
  report["worst_bynum_margin"] = num(rep.worst_bynum_margin);
  report["witness"] = nullptr;
  if (rep.witness) {
    report["witness"] = {{"property", rep.witness->property},
                         {"x", vec(rep.witness->x)},
                         {"y", vec(rep.witness->y)},
                         {"margin", num(rep.witness->margin)}};
  }
  const int code = rep.passed ? kExitOk : kExitViolation;
  emit_report(config, report, code, out);
  return code;
}

int cmd_list_problems(std::ostream& out) {
  for (const auto& p : registry()) {
    out << p.name << "  dim=" << p.dim << "  R=" << fmt(p.R) << "\n    " << p.bounds_note << "\n";
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gradcert: gradient-like solvers with majorant convergence certificates"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool fixed_clock = false;
  std::vector<CLI::Option*> seed_options;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run config")->required();
    seed_options.push_back(sub->add_option("--seed", seed, "seed override"));
    sub->add_flag("--fixed-clock", fixed_clock, "fixed report timestamp");
  };
  auto* solve_cmd = app.add_subcommand("solve", "run a method with certification and verification");
  auto* certify_cmd = app.add_subcommand("certify", "compute a majorant certificate");
  auto* estimate_cmd = app.add_subcommand("estimate", "sample nu, lambda, theta and omega");
  auto* verify_cmd = app.add_subcommand("verify-space", "sample the semiscalar product axioms");
  auto* list_cmd = app.add_subcommand("list-problems", "list built-in problems");
  for (auto* sub : {solve_cmd, certify_cmd, estimate_cmd, verify_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (list_cmd->parsed()) return cmd_list_problems(out);
    RunConfig config = load_config(config_path);
    for (const auto* opt : seed_options) {
      if (opt->count() > 0) config.seed = seed;
    }
    const CommandOptions options{fixed_clock};
    if (solve_cmd->parsed()) return cmd_solve(config, options, out);
    if (certify_cmd->parsed()) return cmd_certify(config, options, out);
    if (estimate_cmd->parsed()) return cmd_estimate(config, options, out);
    return cmd_verify_space(config, options, out);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace gradcert::cli
