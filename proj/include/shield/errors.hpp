#pragma once

#include <stdexcept>
#include <string>

namespace shield {

// Error taxonomy. Construction/validation problems are ConfigError subtypes
// (CLI exit 1); anything that aborts a running sampler is a RuntimeAbort
// (CLI exit 2).

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};

struct ValidationError : ConfigError {
    using ConfigError::ConfigError;
};

struct RuntimeAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : RuntimeAbort {
    DimensionMismatch(int expect, int got)
        : RuntimeAbort("DimensionMismatch: expected dim " + std::to_string(expect) +
                       ", got " + std::to_string(got)) {}
};

struct TimeOutOfRange : RuntimeAbort {
    TimeOutOfRange(double t, double T)
        : RuntimeAbort("TimeOutOfRange: t=" + std::to_string(t) +
                       " outside [0," + std::to_string(T) + "]") {}
};

// Barrier gradient vanished while its constraint row is violated; the safety
// guarantee presumes a nonzero gradient near the boundary, so this is fatal.
struct GradientDegenerate : RuntimeAbort {
    using RuntimeAbort::RuntimeAbort;
};

struct DualNonConvergence : RuntimeAbort {
    using RuntimeAbort::RuntimeAbort;
};

// A sampling path left the constricting tube by more than the tolerance.
struct TubeViolation : RuntimeAbort {
    using RuntimeAbort::RuntimeAbort;
};

struct DegenerateDensity : RuntimeAbort {
    using RuntimeAbort::RuntimeAbort;
};

struct InvalidCount : ValidationError {
    using ValidationError::ValidationError;
};

struct IOError : RuntimeAbort {
    using RuntimeAbort::RuntimeAbort;
};

} // namespace shield
