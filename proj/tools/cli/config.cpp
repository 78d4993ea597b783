#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gradcert::cli {

namespace {

using json = nlohmann::json;
using Path = std::vector<std::string>;

std::string join(const Path& path) {
  std::string out;
  for (const auto& seg : path) out += (out.empty() ? "" : ".") + seg;
  return out.empty() ? "<root>" : out;
}

class Reader {
 public:
  Reader(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const Path& path, const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(line_of(path)) + ": " + join(path) + ": " +
                      message);
  }

  [[noreturn]] void fail_at_offset(std::size_t offset, const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(line_at(offset)) + ": " + message);
  }

  const json& object(const json& j, const Path& path, const std::set<std::string>& allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) {
        Path child = path;
        child.push_back(key);
        fail(child, "unknown key");
      }
    }
    return j;
  }

  double number(const json& j, const Path& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  double positive(const json& j, const Path& path) const {
    const double v = number(j, path);
    if (!(v > 0.0)) fail(path, "must be positive");
    return v;
  }

  std::uint64_t count(const json& j, const Path& path, std::uint64_t min_value = 0) const {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    const auto v = j.get<std::uint64_t>();
    if (v < min_value) fail(path, "must be at least " + std::to_string(min_value));
    return v;
  }

  bool boolean(const json& j, const Path& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::string string(const json& j, const Path& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  std::vector<double> numbers(const json& j, const Path& path) const {
    std::vector<double> out;
    if (j.is_number()) {
      out.push_back(number(j, path));
      return out;
    }
    if (!j.is_array() || j.empty()) fail(path, "expected a number or a nonempty array of numbers");
    for (std::size_t i = 0; i < j.size(); ++i) {
      Path child = path;
      child.push_back(std::to_string(i));
      out.push_back(number(j[i], child));
    }
    return out;
  }

 private:
  /// Line of the last path segment found by a sequential key search.
  int line_of(const Path& path) const {
    std::size_t pos = 0;
    for (const auto& seg : path) {
      const auto found = text_.find("\"" + seg + "\"", pos);
      if (found == std::string::npos) break;
      pos = found;
    }
    return line_at(pos);
  }

  int line_at(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    int line = 1;
    for (std::size_t i = 0; i < offset; ++i) line += text_[i] == '\n';
    return line;
  }

  const std::string& text_;
  const std::string& source_;
};

void parse_problem(const Reader& in, const json& j, RunConfig& cfg) {
  const Path path{"problem"};
  in.object(j, path, {"name", "params"});
  if (!j.contains("name")) in.fail(path, "missing 'name'");
  cfg.problem = in.string(j["name"], {"problem", "name"});
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), *cfg.problem) == names.end()) {
    in.fail({"problem", "name"}, "unknown problem '" + *cfg.problem + "'");
  }
  if (j.contains("params")) {
    const json& params = j["params"];
    if (!params.is_object()) in.fail({"problem", "params"}, "expected an object");
    for (const auto& [key, value] : params.items()) {
      cfg.params[key] = in.numbers(value, {"problem", "params", key});
    }
  }
  try {
    (void)make_problem(*cfg.problem, cfg.params);
  } catch (const Error& e) {
    in.fail({"problem", "params"}, e.what());
  }
}

void parse_method(const Reader& in, const json& j, RunConfig& cfg) {
  in.object(j, {"method"}, {"family", "vartheta"});
  if (j.contains("family")) {
    const auto name = in.string(j["family"], {"method", "family"});
    const auto family = parse_method_family(name);
    if (!family) in.fail({"method", "family"}, "unknown method family '" + name + "'");
    cfg.method.family = *family;
  }
  if (j.contains("vartheta")) cfg.method.vartheta = in.positive(j["vartheta"], {"method", "vartheta"});
}

void parse_space(const Reader& in, const json& j, RunConfig& cfg) {
  in.object(j, {"space"}, {"kind", "p", "sigma"});
  if (j.contains("kind")) cfg.space_kind = in.string(j["kind"], {"space", "kind"});
  if (cfg.space_kind != "Euclidean" && cfg.space_kind != "SequenceP") {
    in.fail({"space", "kind"}, "expected \"Euclidean\" or \"SequenceP\"");
  }
  if (j.contains("p")) {
    if (cfg.space_kind != "SequenceP") in.fail({"space", "p"}, "only valid for SequenceP");
    cfg.p = in.number(j["p"], {"space", "p"});
    if (!(cfg.p >= 2.0)) in.fail({"space", "p"}, "must be >= 2");
  }
  if (j.contains("sigma")) {
    if (cfg.space_kind != "SequenceP") in.fail({"space", "sigma"}, "only valid for SequenceP");
    cfg.sigma = in.positive(j["sigma"], {"space", "sigma"});
  }
}

OmegaConfig parse_omega(const Reader& in, const json& j) {
  const Path path{"bounds", "explicit", "omega"};
  in.object(j, path, {"kind", "L", "alpha", "radii", "t", "values"});
  OmegaConfig omega;
  if (j.contains("kind")) omega.kind = in.string(j["kind"], {"bounds", "explicit", "omega", "kind"});
  const auto need = [&](const char* key) {
    if (!j.contains(key)) in.fail(path, std::string("missing '") + key + "' for kind " + omega.kind);
  };
  if (omega.kind == "zero") {
    return omega;
  }
  if (omega.kind == "lipschitz" || omega.kind == "holder") {
    need("L");
    omega.L = in.number(j["L"], {"bounds", "explicit", "omega", "L"});
    if (omega.L < 0.0) in.fail({"bounds", "explicit", "omega", "L"}, "must be nonnegative");
    if (omega.kind == "holder") {
      need("alpha");
      omega.alpha = in.number(j["alpha"], {"bounds", "explicit", "omega", "alpha"});
      if (!(omega.alpha > 0.0 && omega.alpha <= 1.0)) {
        in.fail({"bounds", "explicit", "omega", "alpha"}, "must lie in (0, 1]");
      }
    }
    return omega;
  }
  if (omega.kind == "tabulated") {
    need("radii");
    need("t");
    need("values");
    omega.radii = in.numbers(j["radii"], {"bounds", "explicit", "omega", "radii"});
    omega.t = in.numbers(j["t"], {"bounds", "explicit", "omega", "t"});
    const json& rows = j["values"];
    if (!rows.is_array() || rows.size() != omega.radii.size()) {
      in.fail({"bounds", "explicit", "omega", "values"}, "expected one row per radius");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      omega.values.push_back(
          in.numbers(rows[i], {"bounds", "explicit", "omega", "values", std::to_string(i)}));
    }
    return omega;
  }
  in.fail({"bounds", "explicit", "omega", "kind"},
          "expected zero, lipschitz, holder or tabulated");
}

void parse_bounds(const Reader& in, const json& j, RunConfig& cfg) {
  in.object(j, {"bounds"}, {"mode", "explicit", "sample_plan"});
  if (j.contains("mode")) cfg.bounds_mode = in.string(j["mode"], {"bounds", "mode"});
  const std::set<std::string> modes{"certified", "estimated", "explicit", "none"};
  if (!modes.count(cfg.bounds_mode)) {
    in.fail({"bounds", "mode"}, "expected certified, estimated, explicit or none");
  }
  if (j.contains("explicit")) {
    const json& e = j["explicit"];
    const Path path{"bounds", "explicit"};
    in.object(e, path, {"lambda", "theta", "mu", "nu", "omega", "R"});
    ExplicitBoundsConfig b;
    if (!e.contains("lambda")) in.fail(path, "missing 'lambda'");
    b.lambda = in.positive(e["lambda"], {"bounds", "explicit", "lambda"});
    if (e.contains("theta")) b.theta = in.positive(e["theta"], {"bounds", "explicit", "theta"});
    if (e.contains("mu") == e.contains("nu")) in.fail(path, "give exactly one of 'mu' and 'nu'");
    if (e.contains("mu")) b.mu = in.number(e["mu"], {"bounds", "explicit", "mu"});
    if (e.contains("nu")) b.nu = in.number(e["nu"], {"bounds", "explicit", "nu"});
    if (e.contains("omega")) b.omega = parse_omega(in, e["omega"]);
    if (e.contains("R")) b.R = in.positive(e["R"], {"bounds", "explicit", "R"});
    cfg.explicit_bounds = b;
  }
  if (cfg.bounds_mode == "explicit" && !cfg.explicit_bounds) {
    in.fail({"bounds", "mode"}, "mode explicit needs an 'explicit' section");
  }
  if (j.contains("sample_plan")) {
    const json& s = j["sample_plan"];
    const Path path{"bounds", "sample_plan"};
    in.object(s, path, {"n_points", "n_dirs", "refine", "radius", "n_radii"});
    auto& plan = cfg.sample_plan;
    if (s.contains("n_points")) plan.n_points = in.count(s["n_points"], {"bounds", "sample_plan", "n_points"}, 1);
    if (s.contains("n_dirs")) plan.n_dirs = in.count(s["n_dirs"], {"bounds", "sample_plan", "n_dirs"}, 1);
    if (s.contains("refine")) plan.refine = in.boolean(s["refine"], {"bounds", "sample_plan", "refine"});
    if (s.contains("radius")) plan.radius = in.positive(s["radius"], {"bounds", "sample_plan", "radius"});
    if (s.contains("n_radii")) plan.n_radii = in.count(s["n_radii"], {"bounds", "sample_plan", "n_radii"}, 1);
  }
}

void parse_run(const Reader& in, const json& j, RunConfig& cfg) {
  in.object(j, {"run"}, {"res_tol", "max_iter", "seed", "apriori_terms"});
  if (j.contains("res_tol")) cfg.res_tol = in.positive(j["res_tol"], {"run", "res_tol"});
  if (j.contains("max_iter")) cfg.max_iter = in.count(j["max_iter"], {"run", "max_iter"});
  if (j.contains("seed")) cfg.seed = in.count(j["seed"], {"run", "seed"});
  if (j.contains("apriori_terms")) cfg.apriori_terms = in.count(j["apriori_terms"], {"run", "apriori_terms"});
}

void parse_output(const Reader& in, const json& j, RunConfig& cfg) {
  in.object(j, {"output"}, {"report_path", "trace_path"});
  if (j.contains("report_path")) cfg.report_path = in.string(j["report_path"], {"output", "report_path"});
  if (j.contains("trace_path")) cfg.trace_path = in.string(j["trace_path"], {"output", "trace_path"});
}

void parse_verify_space(const Reader& in, const json& j, RunConfig& cfg) {
  in.object(j, {"verify_space"}, {"samples", "min_dim", "max_dim", "tolerance"});
  auto& v = cfg.verify_space;
  if (j.contains("samples")) v.samples = in.count(j["samples"], {"verify_space", "samples"}, 1);
  if (j.contains("min_dim")) v.min_dim = static_cast<int>(in.count(j["min_dim"], {"verify_space", "min_dim"}, 1));
  if (j.contains("max_dim")) v.max_dim = static_cast<int>(in.count(j["max_dim"], {"verify_space", "max_dim"}, 1));
  if (j.contains("tolerance")) v.tolerance = in.positive(j["tolerance"], {"verify_space", "tolerance"});
  if (v.max_dim < v.min_dim) in.fail({"verify_space", "max_dim"}, "must be >= min_dim");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  const Reader in(text, source);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    in.fail_at_offset(e.byte > 0 ? e.byte - 1 : 0, std::string("invalid JSON: ") + e.what());
  }
  in.object(doc, {}, {"problem", "method", "space", "bounds", "run", "output", "verify_space"});

  RunConfig cfg;
  if (doc.contains("problem")) parse_problem(in, doc["problem"], cfg);
  if (doc.contains("method")) parse_method(in, doc["method"], cfg);
  if (doc.contains("space")) parse_space(in, doc["space"], cfg);
  if (doc.contains("bounds")) parse_bounds(in, doc["bounds"], cfg);
  if (doc.contains("run")) parse_run(in, doc["run"], cfg);
  if (doc.contains("output")) parse_output(in, doc["output"], cfg);
  if (doc.contains("verify_space")) parse_verify_space(in, doc["verify_space"], cfg);

  if (doc.contains("method")) {
    try {
      validate_method(cfg.method, make_space(cfg));
    } catch (const Error& e) {
      in.fail({"method"}, e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError(path + ":0: cannot open config file");
  std::ostringstream buf;
  buf << file.rdbuf();
  return parse_config(buf.str(), path);
}

SpaceGeometry make_space(const RunConfig& config) {
  if (config.space_kind == "Euclidean") return SpaceGeometry::euclidean();
  if (config.sigma) return SpaceGeometry::sequence_with_sigma(config.p, *config.sigma);
  return SpaceGeometry::sequence(config.p);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  if (c.problem) {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : c.params) {
      if (value.size() == 1) {
        params[key] = value.front();
      } else {
        params[key] = value;
      }
    }
    j["problem"] = {{"name", *c.problem}, {"params", params}};
  }
  j["method"] = {{"family", std::string(to_string(c.method.family))}, {"vartheta", c.method.vartheta}};
  j["space"] = {{"kind", c.space_kind}};
  if (c.space_kind == "SequenceP") {
    j["space"]["p"] = c.p;
    j["space"]["sigma"] = make_space(c).sigma();
  }
  nlohmann::ordered_json bounds{{"mode", c.bounds_mode}};
  if (c.explicit_bounds) {
    const auto& e = *c.explicit_bounds;
    nlohmann::ordered_json ex{{"lambda", e.lambda}, {"theta", e.theta}};
    if (e.mu) ex["mu"] = *e.mu;
    if (e.nu) ex["nu"] = *e.nu;
    nlohmann::ordered_json om{{"kind", e.omega.kind}};
    if (e.omega.kind == "lipschitz" || e.omega.kind == "holder") om["L"] = e.omega.L;
    if (e.omega.kind == "holder") om["alpha"] = e.omega.alpha;
    if (e.omega.kind == "tabulated") {
      om["radii"] = e.omega.radii;
      om["t"] = e.omega.t;
      om["values"] = e.omega.values;
    }
    ex["omega"] = om;
    if (e.R) ex["R"] = *e.R;
    bounds["explicit"] = ex;
  }
  nlohmann::ordered_json plan{{"n_points", c.sample_plan.n_points},
                              {"n_dirs", c.sample_plan.n_dirs},
                              {"refine", c.sample_plan.refine},
                              {"n_radii", c.sample_plan.n_radii}};
  if (c.sample_plan.radius) plan["radius"] = *c.sample_plan.radius;
  bounds["sample_plan"] = plan;
  j["bounds"] = bounds;
  j["run"] = {{"res_tol", c.res_tol},
              {"max_iter", c.max_iter},
              {"seed", c.seed},
              {"apriori_terms", c.apriori_terms}};
  j["output"] = {{"report_path", c.report_path}, {"trace_path", c.trace_path}};
  j["verify_space"] = {{"samples", c.verify_space.samples},
                       {"min_dim", c.verify_space.min_dim},
                       {"max_dim", c.verify_space.max_dim},
                       {"tolerance", c.verify_space.tolerance}};
  return j;
}

}  // namespace gradcert::cli
