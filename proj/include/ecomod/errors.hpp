#pragma once

#include <stdexcept>
#include <string>

namespace ecomod {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnreachableDestination : Error { using Error::Error; };
struct InvalidK : Error { using Error::Error; };
struct NonPositiveSpeed : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct NonMonotoneFit : Error { using Error::Error; };
struct EmptyPartition : Error { using Error::Error; };
struct IllegalTransition : Error { using Error::Error; };
struct CapacityExceeded : Error { using Error::Error; };
struct ZeroNormalizer : Error { using Error::Error; };
struct InfeasibleProgram : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct CongestedAmbiguity : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace ecomod
