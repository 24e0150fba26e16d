#pragma once

#include <stdexcept>
#include <string>

namespace panelfair {

// Bad parameters: dimension mismatches, C = 0, gamma outside (0, 1], ...
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed data: unknown context ids, duplicate hypotheses, ...
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A probability fell below the guard of an importance-weighted estimator.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Something that must hold by construction did not (e.g. an infeasible comparator LP).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Filesystem failures; the message always carries the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, const std::string& path)
        : std::runtime_error(what + ": " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace panelfair
