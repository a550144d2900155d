#pragma once

#include <stdexcept>
#include <string>

namespace hlm {

// Base of every exception thrown by the library. Callers that only care
// about success/failure can catch this one type.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (n = 0, composite p, ...).
class domain_error : public error {
public:
    using error::error;
};

// A computation would exceed its enumeration, memory or integer-width budget.
class capacity_error : public error {
public:
    using error::error;
};

// A DiagonalSystem or ExperimentConfig violates one of its invariants.
class validation_error : public error {
public:
    using error::error;
};

// Algebraic structure requirement not met (e.g. non-cyclic unit group).
class structure_error : public error {
public:
    using error::error;
};

// Malformed config document; the message starts with the offending field path.
class parse_error : public error {
public:
    parse_error(const std::string& path, const std::string& what)
        : error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// File could not be read or written; the message names the path.
class io_error : public error {
public:
    io_error(const std::string& path, const std::string& what) : error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace hlm
