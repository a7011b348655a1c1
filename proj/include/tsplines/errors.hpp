#pragma once

#include <stdexcept>
#include <string>

namespace tsplines {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- matrix / Gaussian errors ---
struct NonSymmetric : Error { using Error::Error; };
struct NotPsd : Error { using Error::Error; };
struct DegenerateSource : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// --- spline errors ---
struct LengthMismatch : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

// --- coupling errors ---
struct NotIncreasing : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };

// --- transport spline / thin-plate errors ---
struct MixedFamilies : Error { using Error::Error; };
struct WrongFamily : Error { using Error::Error; };
struct CollinearSites : Error { using Error::Error; };
struct DuplicateSites : Error { using Error::Error; };

// --- experiment harness errors ---
struct MeshTooCoarse : Error { using Error::Error; };

} // namespace tsplines
