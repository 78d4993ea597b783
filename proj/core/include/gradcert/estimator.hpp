#pragma once

#include "gradcert/majorant.hpp"
#include "gradcert/method_spec.hpp"
#include "gradcert/problem.hpp"
#include "gradcert/spaces.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gradcert {

struct SamplePlan {
  std::uint64_t seed = 0;
  std::size_t n_points = 32;  ///< ball samples, x0 included
  std::size_t n_dirs = 256;   ///< directions per point (on top of axes and diagonals)
  bool refine = false;        ///< polish the extremal sample by coordinate descent
};

/// Sampled estimates approach the true inf from above and the true sup from below.
enum class EstimateKind { UpperEstimateOfInf, LowerEstimateOfSup };

std::string_view to_string(EstimateKind kind);

struct Estimate {
  double value = 0.0;
  EstimateKind kind = EstimateKind::UpperEstimateOfInf;
  std::size_t samples = 0;
  Vector arg_x;  ///< sample point attaining the extremum
  Vector arg_h;  ///< direction attaining the extremum (empty when not applicable)
};

/// inf over ||x - x0|| <= r, ||h|| = 1 of [h, Bh] / (||h|| ||Bh||), B = f'(x) T(x).
/// A sample with Bh = 0 yields 0, i.e. a reported acuteness failure.
Estimate estimate_nu_tilde(const Problem& problem, const MethodSpec& method,
                           const SpaceGeometry& space, double r, const SamplePlan& plan);

/// sup of [h, Bh] / (sigma ||Bh||^2) for the min-quadratic rule, or of
/// ||h||^2 / (vartheta [h, Bh]) for Altman-type rules (+infinity when [h, Bh] <= 0).
Estimate estimate_lambda_tilde(const Problem& problem, const MethodSpec& method,
                               const SpaceGeometry& space, double r, const SamplePlan& plan);

/// Residual-direction variant of nu: inf over sampled x of
/// [f, Bf] / (||f|| ||Bf||). Never below estimate_nu_tilde on the same plan.
Estimate estimate_nu_trajectory(const Problem& problem, const MethodSpec& method,
                                const SpaceGeometry& space, double r, const SamplePlan& plan);

/// sup over sampled pairs of ||f'(x1) - f'(x2)|| / ||x1 - x2||.
Estimate estimate_omega_lipschitz(const Problem& problem, const SpaceGeometry& space, double r,
                                  const SamplePlan& plan);

/// sup over sampled x of ||T(x)||.
Estimate estimate_theta(const Problem& problem, const MethodSpec& method,
                        const SpaceGeometry& space, double r, const SamplePlan& plan);

struct RadiusEstimates {
  double r = 0.0;
  double nu_tilde = 0.0;
  double lambda_tilde = 0.0;
  double theta = 0.0;
  double lipschitz = 0.0;
};

struct EstimatedBounds {
  std::vector<RadiusEstimates> table;  ///< monotone envelopes on the radius grid
  std::optional<BoundData> bounds;     ///< nullopt when acuteness fails or lambda is unbounded
  std::string diagnostics;
};

/// Estimates on the grid r_k = R k / n_radii and turns them into step
/// functions of r (value at the smallest grid radius >= r), with running
/// min / max so the monotonicity requirements of BoundData hold.
EstimatedBounds estimate_bounds(const Problem& problem, const MethodSpec& method,
                                const SpaceGeometry& space, const SamplePlan& plan,
                                std::size_t n_radii = 8);

}  // namespace gradcert
