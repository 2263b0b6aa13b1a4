#pragma once

#include <stdexcept>
#include <string>

namespace pan {

// Exit-code contract of the CLI: 2 input/config, 3 numerical, 4 artifact mismatch.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ArtifactMismatch : std::runtime_error {
    explicit ArtifactMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pan
