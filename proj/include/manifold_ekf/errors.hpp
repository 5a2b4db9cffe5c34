#pragma once

#include <stdexcept>
#include <string>

namespace manifold_ekf {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or tangent vector lies outside the domain on which the normal
/// coordinates are a diffeomorphism (at or beyond the cut locus).
class ChartDomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be symmetric positive-definite failed factorization.
class NotSPDError : public Error {
 public:
  using Error::Error;
};

/// The innovation covariance C Σ Cᵀ + Q could not be factorized.
class SingularInnovationError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Vector, matrix or point size disagrees with the manifold it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace manifold_ekf
