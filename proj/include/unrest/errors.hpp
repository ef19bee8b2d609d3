#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace unrest {

// Exit-code families surfaced by the CLI: 1 config, 2 assumptions,
// 3 solver abort, 4 not-converged.
enum class ErrorClass : int {
    Config = 1,
    Assumption = 2,
    Solver = 3,
    NotConverged = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg) : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

// --- expression language -------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, int column, std::string expected = {})
        : Error(ErrorClass::Config, msg + " (column " + std::to_string(column) + ")"),
          column_(column), expected_(std::move(expected)) {}
    int column() const noexcept { return column_; }          // 1-based
    const std::string& expected() const noexcept { return expected_; }

private:
    int column_;
    std::string expected_;
};

class UnknownFunction : public Error {
public:
    UnknownFunction(const std::string& name, int column)
        : Error(ErrorClass::Config,
                "unknown function '" + name + "' (column " + std::to_string(column) + ")"),
          column_(column) {}
    int column() const noexcept { return column_; }

private:
    int column_;
};

struct UnboundVariable : Error {
    explicit UnboundVariable(const std::string& name)
        : Error(ErrorClass::Config, "variable '" + name + "' is not allowed here") {}
};

struct UnboundConstant : Error {
    explicit UnboundConstant(const std::string& name)
        : Error(ErrorClass::Config, "constant '" + name + "' is not defined") {}
};

struct EvalDomainError : Error {
    explicit EvalDomainError(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

// --- model / derived scalars ---------------------------------------------

struct BracketError : Error {
    explicit BracketError(const std::string& msg) : Error(ErrorClass::NotConverged, msg) {}
};

struct NoPositiveRoot : Error {
    explicit NoPositiveRoot(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct SubcriticalTension : Error {
    explicit SubcriticalTension(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct PreconditionViolated : Error {
    explicit PreconditionViolated(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct AssumptionViolation : Error {
    AssumptionViolation(const std::string& msg, std::string report_text)
        : Error(ErrorClass::Assumption, msg), report_(std::move(report_text)) {}
    const std::string& report_text() const noexcept { return report_; }

private:
    std::string report_;
};

// --- solver ----------------------------------------------------------------

struct InvalidInitialData : Error {
    explicit InvalidInitialData(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct CflViolation : Error {
    explicit CflViolation(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct BlowUp : Error {
    explicit BlowUp(const std::string& msg) : Error(ErrorClass::Solver, msg) {}
};

struct PositivityViolation : Error {
    explicit PositivityViolation(const std::string& msg) : Error(ErrorClass::Solver, msg) {}
};

struct FrontTooClose : Error {
    explicit FrontTooClose(const std::string& msg) : Error(ErrorClass::Solver, msg) {}
};

// --- analysis ---------------------------------------------------------------

struct NoFront : Error {
    explicit NoFront(const std::string& msg) : Error(ErrorClass::NotConverged, msg) {}
};

struct NotConverged : Error {
    explicit NotConverged(const std::string& msg) : Error(ErrorClass::NotConverged, msg) {}
};

// --- configuration ----------------------------------------------------------

struct ConfigSyntax : Error {
    explicit ConfigSyntax(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct ConfigSchema : Error {
    explicit ConfigSchema(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

} // namespace unrest
