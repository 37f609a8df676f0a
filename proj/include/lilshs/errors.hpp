#pragma once

#include <stdexcept>
#include <string>

namespace lilshs {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config/model files, unknown names, invalid
/// parameter combinations. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

/// A scheme/step-size pair that violates the rotational admissibility
/// condition 4 det A - (tr A)^2 > 0, or a rotation too close to resonance
/// for the closed forms to be evaluated. CLI exit code 3.
struct InadmissibleError : Error {
    using Error::Error;
};

/// Long-horizon growth-statistic run requested for a scheme with det A > 1,
/// where the scaled upper limit need not exist. CLI exit code 4.
struct ExpansiveError : Error {
    using Error::Error;
};

}  // namespace lilshs
