#pragma once

#include <stdexcept>
#include <string>

namespace seqbn {

/// Malformed structure, dimension mismatch, or an index outside a key.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid hyperparameter or option value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A structure was scored against a store that cannot evaluate one of its families.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Conditioning on evidence of probability zero.
class ZeroEvidenceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Dataset rows or headers that do not match the expected variable table.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace seqbn
