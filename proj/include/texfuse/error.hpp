#pragma once

#include <stdexcept>
#include <string>

namespace texfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image file could not be read or decoded.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Image or kernel dimensions are too small for the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Coordinates fall outside the image.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Invalid numeric parameter (sigma, thresholds, cluster count, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An object was used before it was ready (e.g. untrained codebook).
class StateError : public Error {
public:
    using Error::Error;
};

/// Inputs disagree on shape, labels or sample order.
class ContractError : public Error {
public:
    using Error::Error;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

class IngestionError : public Error {
public:
    using Error::Error;
};

/// Bad run/fusion configuration. `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace texfuse
