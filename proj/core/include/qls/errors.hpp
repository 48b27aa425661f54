#pragma once

#include <stdexcept>
#include <string>

namespace qls {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Matrix dimensions do not fit the operation.
struct DimensionError : Error {
  using Error::Error;
};

/// A structural precondition (Hermiticity, block pairing, similarity, ...)
/// is violated beyond tolerance.
struct StructureError : Error {
  using Error::Error;
};

/// A factorization target has the wrong inertia.
struct InfeasibleError : Error {
  using Error::Error;
};

/// A Gaussian input fails the purity identity.
struct PurityError : Error {
  using Error::Error;
};

/// The operation needs a Hurwitz state matrix.
struct StabilityError : Error {
  using Error::Error;
};

/// The evaluation point collides with the spectrum of the state matrix.
struct SingularityError : Error {
  using Error::Error;
};

/// Redundant criteria that must agree do not; usually a tolerance
/// misconfiguration on a borderline system.
struct ConsistencyError : Error {
  using Error::Error;
};

/// The pole configuration violates the genericity assumptions
/// (repeated poles, real poles, broken reflection pairing).
struct GenericityError : Error {
  using Error::Error;
};

/// A residue matrix has numerical rank above one.
struct RankError : Error {
  using Error::Error;
};

/// The power spectrum admits a realization of lower order than the
/// candidate system; the system is not globally minimal.
struct GlobalMinimalityError : Error {
  using Error::Error;
};

/// Generic numerical failure with diagnostics in the message.
struct NumericalError : Error {
  using Error::Error;
};

/// Sylvester-type solve encountered intersecting spectra.
struct DegeneracyError : NumericalError {
  using NumericalError::NumericalError;
};

/// Detected model order differs from the requested one.
struct OrderError : Error {
  OrderError(const std::string& message, long detected_order)
      : Error(message), detected(detected_order) {}
  long detected;
};

}  // namespace qls
