#pragma once

#include "gradcert/majorant.hpp"
#include "gradcert/method_spec.hpp"
#include "gradcert/spaces.hpp"
#include "gradcert/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace gradcert {

/// An operator equation f(x) = 0 posed on the ball B(x0, R).
struct Problem {
  std::string name;
  int dim = 1;
  std::function<Vector(const Vector&)> eval_f;
  /// Row i is the gradient of component i.
  std::function<Matrix(const Vector&)> eval_jacobian;
  Vector x0;
  double R = 1.0;
  std::optional<Vector> known_solution;
  /// Analytically derived bounds for a method/space pair, or nullopt when
  /// none are available for that combination.
  std::function<std::optional<BoundData>(const MethodSpec&, const SpaceGeometry&)> certified_bounds;
  /// How the certified bounds were derived.
  std::string bounds_note;
};

}  // namespace gradcert
