#pragma once

#include <stdexcept>
#include <string>

namespace pka {

/// Broad failure classes; the CLI maps these onto exit codes.
enum class ErrorKind {
    Syntax,          ///< malformed expression text or JSON
    UnknownIdentifier,
    Closedness,      ///< left operand of `;` has free variables
    Productivity,    ///< unguarded recursion / action-free cycle
    Shape,           ///< automaton transition does not match its label
    UnboundVariable,
    MalformedSystem,
    NoMatch,         ///< rewrite rule does not apply at the position
    DepthMismatch,
    InvalidArgument,
    SupportExplosion ///< resource budget exceeded
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::Syntax: return "syntax";
        case ErrorKind::UnknownIdentifier: return "unknown_identifier";
        case ErrorKind::Closedness: return "closedness_violation";
        case ErrorKind::Productivity: return "productivity_violation";
        case ErrorKind::Shape: return "shape_error";
        case ErrorKind::UnboundVariable: return "unbound_variable";
        case ErrorKind::MalformedSystem: return "malformed_system";
        case ErrorKind::NoMatch: return "no_match";
        case ErrorKind::DepthMismatch: return "depth_mismatch";
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::SupportExplosion: return "support_explosion";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failure with a byte offset into the source text.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t pos)
        : Error(ErrorKind::Syntax, what + " at offset " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

} // namespace pka
