#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scld {

// Malformed user input: bad syntax, unknown symbols, schema violations,
// unsatisfiable evidence. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A configured resource limit (decisions, cache memory) was hit before an
// exact answer was reached. Maps to CLI exit code 3.
class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Conditioning on a sentence set with no models.
class InconsistentEvidence : public InputError {
public:
    using InputError::InputError;
};

// Receiver got a message that contradicts what it already holds.
class ProtocolViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SourceLocation {
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

class ParseError : public InputError {
public:
    enum class Kind { Syntax, UnknownPredicate, UnknownEntity, ArityMismatch, UnboundVariable, Shadowing };

    ParseError(Kind kind, SourceLocation where, const std::string& what)
        : InputError(describe(kind) + " at " + std::to_string(where.line) + ":" + std::to_string(where.column) +
                     " (offset " + std::to_string(where.offset) + "): " + what),
          kind_(kind), where_(where) {}

    Kind kind() const noexcept { return kind_; }
    const SourceLocation& where() const noexcept { return where_; }
    std::size_t offset() const noexcept { return where_.offset; }

private:
    static std::string describe(Kind kind) {
        switch (kind) {
        case Kind::Syntax: return "syntax error";
        case Kind::UnknownPredicate: return "unknown predicate";
        case Kind::UnknownEntity: return "unknown entity";
        case Kind::ArityMismatch: return "arity mismatch";
        case Kind::UnboundVariable: return "unbound variable";
        case Kind::Shadowing: return "shadowed variable";
        }
        return "parse error";
    }

    Kind kind_;
    SourceLocation where_;
};

} // namespace scld
