#include "gradcert/types.hpp"

namespace gradcert {

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw InputError(std::string(what) + ": vector has non-finite entries");
  }
}

void require_same_dim(const Vector& a, const Vector& b, std::string_view what) {
  if (a.size() != b.size()) {
    throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace gradcert
