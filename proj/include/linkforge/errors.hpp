#pragma once

#include <stdexcept>
#include <string>

namespace linkforge {

// Bad flags, bad option names, contract violations. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/unparseable files, checkpoint mismatches. CLI exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bit-stream length not a multiple of the code/constellation block.
struct FramingError : std::runtime_error {
    explicit FramingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace linkforge
