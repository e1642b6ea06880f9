#pragma once

#include <stdexcept>
#include <string>

namespace sine {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad field values, violated constraints). CLI exit code 3.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

// Malformed input data (missing columns, unparseable rows).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error("data error: " + msg) {}
};

// NaN/Inf encountered, degenerate metric input, divergence.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error("numeric error: " + msg) {}
};

// API misuse: shape mismatch, unknown item id, sequence too long.
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error("contract error: " + msg) {}
};

// Filesystem failures.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

}  // namespace sine
