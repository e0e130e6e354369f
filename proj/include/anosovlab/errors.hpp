#pragma once

#include <stdexcept>
#include <string>

namespace anosovlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid construction data (non-unimodular matrix, bad shear axes, ...)
struct ConstructionError : Error {
  using Error::Error;
};

// a cocycle product entry exceeded the configured magnitude cap
struct CocycleOverflow : Error {
  using Error::Error;
};

// finite-time rates came out >= 1
struct NotHyperbolic : Error {
  using Error::Error;
};

// a chart stopped being valid (vertical slope, graph over the unstable
// reference left its chart, singular pushforward)
struct ChartError : Error {
  using Error::Error;
};

// regression input indistinguishable from constant at the noise floor
struct DegenerateFit : Error {
  using Error::Error;
};

// mismatched grid resolutions / dimensions
struct FieldMismatch : Error {
  using Error::Error;
};

// manifold growth could not satisfy its contract
struct ManifoldError : Error {
  using Error::Error;
};

// violated operation precondition (out-of-range arclength, bad d_u, ...)
struct DomainError : Error {
  using Error::Error;
};

}  // namespace anosovlab
