#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nrrt {

// Argument-level failures use std::invalid_argument directly. The types below
// cover the domain failures callers are expected to distinguish.

class InfeasibleProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyPrior : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyFreeSpace : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed map, prior or result file. `offset` is a byte offset for binary
/// formats and a 1-based line (or row index) for text formats.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace nrrt
