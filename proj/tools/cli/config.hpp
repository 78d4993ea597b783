#pragma once

#include "gradcert/method_spec.hpp"
#include "gradcert/problems.hpp"
#include "gradcert/spaces.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradcert::cli {

/// Config validation failure, already formatted as "source:line: message".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OmegaConfig {
  std::string kind = "zero";  ///< zero | lipschitz | holder | tabulated
  double L = 0.0;
  double alpha = 1.0;
  std::vector<double> radii;
  std::vector<double> t;
  std::vector<std::vector<double>> values;
};

struct ExplicitBoundsConfig {
  double lambda = 1.0;
  double theta = 1.0;
  std::optional<double> mu;
  std::optional<double> nu;
  OmegaConfig omega;
  std::optional<double> R;
};

struct SamplePlanConfig {
  std::size_t n_points = 32;
  std::size_t n_dirs = 256;
  bool refine = false;
  std::optional<double> radius;
  std::size_t n_radii = 8;
};

struct VerifySpaceConfig {
  std::size_t samples = 1000;
  int min_dim = 1;
  int max_dim = 6;
  double tolerance = 1e-9;
};

struct RunConfig {
  std::optional<std::string> problem;
  ProblemParams params;
  MethodSpec method;
  std::string space_kind = "Euclidean";
  double p = 2.0;
  std::optional<double> sigma;
  std::string bounds_mode = "certified";  ///< certified | estimated | explicit | none
  std::optional<ExplicitBoundsConfig> explicit_bounds;
  SamplePlanConfig sample_plan;
  double res_tol = 1e-10;
  std::size_t max_iter = 1000;
  std::uint64_t seed = 0;
  std::size_t apriori_terms = 10;
  std::string report_path;
  std::string trace_path;
  VerifySpaceConfig verify_space;
};

/// Parses and validates a config document. Unknown keys are errors.
RunConfig parse_config(const std::string& text, const std::string& source);

RunConfig load_config(const std::string& path);

/// The fully resolved config (defaults filled in), as embedded in reports.
nlohmann::ordered_json to_json(const RunConfig& config);

SpaceGeometry make_space(const RunConfig& config);

}  // namespace gradcert::cli
