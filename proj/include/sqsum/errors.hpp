#pragma once

#include <stdexcept>

namespace sqsum {

// Contract-violation taxonomy shared by all modules. Protocol-level events
// (aborts, detections) are ordinary data, never exceptions; anything below
// signals a misuse of an API or a broken internal invariant.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityExceeded : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct ControlEqualsTarget : Error { using Error::Error; };
struct OverlappingPairs : Error { using Error::Error; };
struct NonOrthonormalBasis : Error { using Error::Error; };
struct DegenerateState : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct WrongRegisterSize : Error { using Error::Error; };
struct FactorizationFailed : Error { using Error::Error; };
struct NonIntegerParticleCount : Error { using Error::Error; };
struct UnsupportedAttack : Error { using Error::Error; };

}  // namespace sqsum
