#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cadence {

// Malformed input text (CSV header, KVN keys, JSON schema).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A single unparseable data row; line numbers are 1-based and count the header.
class RowError : public FormatError {
public:
    RowError(std::size_t line, const std::string& what)
        : FormatError("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when prediction has too few observed CDMs to condition on.
class InsufficientHistory : public std::runtime_error {
public:
    explicit InsufficientHistory(const std::string& detail = {})
        : std::runtime_error(detail.empty() ? "insufficient history" : "insufficient history: " + detail) {}
};

class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Posterior failed the convergence gate under a hard-fail policy.
class DiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cadence
