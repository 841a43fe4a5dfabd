#pragma once

#include <stdexcept>
#include <string>

namespace xad {

// Error hierarchy shared by the library and the CLI. Each kind maps to a
// fixed process exit code so batch drivers can dispatch on failures.
class Error : public std::runtime_error {
public:
    Error(int exit_code, std::string kind, const std::string& msg)
        : std::runtime_error(msg), exit_code_(exit_code), kind_(std::move(kind)) {}

    int exit_code() const noexcept { return exit_code_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    int exit_code_;
    std::string kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(2, "config", msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(3, "data", msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(4, "numeric", msg) {}
};

class ArtifactError : public Error {
public:
    explicit ArtifactError(const std::string& msg) : Error(5, "artifact", msg) {}
};

// Shape disagreements between tensors, models and datasets.
class DimensionError : public ArtifactError {
public:
    explicit DimensionError(const std::string& msg) : ArtifactError(msg) {}
};

}  // namespace xad
