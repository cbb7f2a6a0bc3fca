#pragma once

#include <stdexcept>
#include <string>

namespace l1ac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad matrix shapes or non-finite numbers handed to a numerical routine.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A configuration value fails validation. `key()` names the offending entry
/// (dotted path for scenario files, field name for programmatic configs).
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// The closed loop produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(double time, const std::string& what)
        : Error("diverged at t = " + std::to_string(time) + " s: " + what), time_(time) {}

    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace l1ac
