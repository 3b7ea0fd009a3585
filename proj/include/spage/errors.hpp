#pragma once

#include <stdexcept>
#include <string>

namespace spage {

// Base for every error thrown by the library. `kind()` is a stable
// machine-readable tag used by the CLI when emitting JSON diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error("IoError", m) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& m) : Error("FormatError", m) {}
};

class TypeError : public Error {
public:
    explicit TypeError(const std::string& m) : Error("TypeError", m) {}
};

// Parse failure with a 1-based source position and what was expected there.
class SyntaxError : public Error {
public:
    SyntaxError(int line, int col, const std::string& expected, const std::string& m)
        : Error("SyntaxError", m), line_(line), col_(col), expected_(expected) {}

    int line() const { return line_; }
    int col() const { return col_; }
    const std::string& expected() const { return expected_; }

private:
    int line_;
    int col_;
    std::string expected_;
};

class StructureError : public Error {
public:
    explicit StructureError(const std::string& m) : Error("StructureError", m) {}
};

class ReferenceError : public Error {
public:
    explicit ReferenceError(const std::string& m) : Error("ReferenceError", m) {}
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(const std::string& m) : Error("DuplicateIdError", m) {}
};

// Runtime evaluation failure inside the engine (incomparable sort keys,
// division by zero, arithmetic overflow).
class EvalError : public Error {
public:
    explicit EvalError(const std::string& m) : Error("RuntimeError", m) {}
};

// Schema resolution failure at execution time (only reachable when the
// validator was skipped).
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& m) : Error("SchemaError", m) {}
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& m) : Error("Timeout", m) {}
};

class UnsupportedExpr : public Error {
public:
    explicit UnsupportedExpr(const std::string& m) : Error("UnsupportedExpr", m) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string& m) : Error("BackendError", m) {}
};

class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& m) : Error("BudgetExceeded", m) {}
};

class NoJsonFound : public Error {
public:
    explicit NoJsonFound(const std::string& m) : Error("NoJsonFound", m) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& m) : Error("EmptyInput", m) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& m) : Error("LengthMismatch", m) {}
};

class MissingReference : public Error {
public:
    explicit MissingReference(const std::string& m) : Error("MissingReference", m) {}
};

}  // namespace spage
