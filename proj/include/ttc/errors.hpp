#pragma once

#include <stdexcept>
#include <string>

namespace ttc {

// Bad run configuration: unknown algorithm, malformed config JSON, invalid
// parameter combinations. Maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string & msg) : std::runtime_error(msg) {}
};

// Filesystem failures: missing input, unwritable output. Maps to CLI exit code 2.
struct IoError : std::runtime_error {
    explicit IoError(const std::string & msg) : std::runtime_error(msg) {}
};

} // namespace ttc
