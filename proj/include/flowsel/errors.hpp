#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowsel {

// Input-data errors (CLI exit code 2).

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
          line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyTrainingSet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Policy/label mismatch (CLI exit code 3), e.g. oracle selection on data
// without labels.
class LabelsUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Recoverable conditions callers are expected to handle.

// Selection window holds no usable flows; callers fall back.
class NoData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No accepted prediction to aggregate over.
class NoAccepted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Epps-Singleton covariance matrix is (near-)singular; the pooled sample is
// effectively constant and the test cannot tell the distributions apart.
class DegenerateCovariance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ideal-model metric is zero; the ratio is undefined.
class DivisionByZero : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace flowsel
