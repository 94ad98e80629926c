#pragma once

#include <stdexcept>
#include <string>

namespace fgnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shapes disagree with an operation's contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// NaN or infinity where finite values are required.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (CSV cells, ragged rows, short splits).
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value. `key()` holds the dotted key path.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace fgnn
