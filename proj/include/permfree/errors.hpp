#pragma once

#include <stdexcept>
#include <string>

namespace permfree {

/// Error categories map one-to-one onto the CLI exit codes.
enum class ErrorKind {
    validation,   // malformed input, out-of-range index, size mismatch (exit 2)
    domain,       // argument outside an operation's mathematical domain (exit 2)
    unsupported,  // well-formed but outside the implemented formulas (exit 2)
    budget,       // enumeration size above the configured cap (exit 3)
    io,           // unreadable/unwritable path (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::budget: return 3;
            case ErrorKind::io: return 4;
            default: return 2;
        }
    }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& what) : Error(ErrorKind::unsupported, what) {}
};

struct BudgetError : Error {
    explicit BudgetError(const std::string& what) : Error(ErrorKind::budget, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Parse failures carry the byte offset of the offending character.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(ErrorKind::validation, what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace permfree
