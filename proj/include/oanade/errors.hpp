#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oanade {

using InvalidArgument = std::invalid_argument;

// Raised when an exact enumeration would exceed its hard size cap.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// A loss or objective produced a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class FetchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace oanade
