#pragma once

#include <stdexcept>
#include <string>

namespace capgen {

// Bad arguments, malformed input files, contract violations. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Size caps, bit-budget exhaustion, iteration limits. CLI exit code 3.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace capgen
