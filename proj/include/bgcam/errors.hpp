#pragma once

#include <stdexcept>
#include <string>

namespace bgcam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (shape, range, ordering).
class ContractError : public Error {
public:
    using Error::Error;
};

/// A SensorConfig / RunConfig is invalid or does not match its input.
class ConfigError : public ContractError {
public:
    using ContractError::ContractError;
};

/// A .bgc byte stream is truncated or violates the format invariants.
class CorruptStream : public Error {
public:
    using Error::Error;
};

/// A text input (CSV, manifest, config file) could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A ratio statistic has an empty denominator.
class UndefinedRatio : public Error {
public:
    using Error::Error;
};

/// Image file could not be read or written.
class ImageError : public Error {
public:
    using Error::Error;
};

} // namespace bgcam
