#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace gradcert {

/// Finite-dimensional model of an element of the ambient space.
using Vector = Eigen::VectorXd;
/// Linearization f'(x); row i is the gradient of component i.
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (non-finite entries, bad dimensions, bad parameters).
class InputError : public Error {
 public:
  using Error::Error;
};

/// The majorant series w(r, phi) diverges (phi at or beyond phi*(r)).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The linear contraction factor mu(r) is >= 1, so no certificate can exist.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Altman-type step with nu(r) <= sqrt(sigma / (2 vartheta)).
class ValidityError : public Error {
 public:
  using Error::Error;
};

/// The step functional cannot be evaluated: a denominator vanished or
/// the step size became negative.
class BreakdownError : public Error {
 public:
  using Error::Error;
};

/// Throws InputError if any entry of v is NaN or infinite.
void require_finite(const Vector& v, std::string_view what);

/// Throws InputError unless a and b have the same dimension.
void require_same_dim(const Vector& a, const Vector& b, std::string_view what);

}  // namespace gradcert
