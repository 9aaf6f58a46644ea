#pragma once

#include <stdexcept>
#include <string>

namespace courage {

/// Shape mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value (odd model dimension, fraction outside (0,1), ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced NaN or Inf.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An object was used in the wrong lifecycle state (apply before fit, double backward).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed input file. The message carries file and line when known.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two forecast sets, checkpoints or tables that are expected to agree do not.
class MismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace courage
