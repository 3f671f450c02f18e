#pragma once

#include <stdexcept>
#include <string>

namespace seldpair {

/// Bad arguments, malformed configuration, or inputs that violate a
/// documented precondition. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Inconsistent or unreadable data encountered mid-pipeline. Maps to CLI
/// exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seldpair
