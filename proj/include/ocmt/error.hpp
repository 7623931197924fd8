#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace ocmt {

/// Machine-readable error classes surfaced by the CLI.
enum class ErrorCategory {
    config,
    io,
    parse,
    numeric,
    overparameterized,
    domain,
};

inline constexpr std::string_view to_string(ErrorCategory c)
{
    switch (c) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
        case ErrorCategory::parse: return "parse";
        case ErrorCategory::numeric: return "numeric";
        case ErrorCategory::overparameterized: return "overparameterized";
        case ErrorCategory::domain: return "domain";
    }
    return "unknown";
}

/// Process exit code for an error category (0 is reserved for success).
inline constexpr int exit_code(ErrorCategory c)
{
    switch (c) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::io: return 3;
        case ErrorCategory::parse: return 4;
        case ErrorCategory::numeric: return 5;
        case ErrorCategory::overparameterized: return 6;
        case ErrorCategory::domain: return 7;
    }
    return 1;
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category)
    {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct ConfigError : Error
{
    explicit ConfigError(const std::string& w) : Error(ErrorCategory::config, w) {}
};

struct DimensionError : Error
{
    explicit DimensionError(const std::string& w) : Error(ErrorCategory::config, w) {}
};

struct DomainError : Error
{
    explicit DomainError(const std::string& w) : Error(ErrorCategory::domain, w) {}
};

struct IoError : Error
{
    explicit IoError(const std::string& w) : Error(ErrorCategory::io, w) {}
};

struct ParseError : Error
{
    explicit ParseError(const std::string& w) : Error(ErrorCategory::parse, w) {}
};

struct NumericError : Error
{
    explicit NumericError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

/// Design block or stacked design is numerically rank deficient.
struct RankError : NumericError
{
    using NumericError::NumericError;
};

struct SingularDesignError : RankError
{
    using RankError::RankError;
};

/// Residual variance vanished (perfect in-sample fit).
struct ZeroVarianceError : NumericError
{
    using NumericError::NumericError;
};

/// Min-max map of a column with a single distinct value.
struct DegenerateColumnError : NumericError
{
    using NumericError::NumericError;
};

struct OverparameterizedError : Error
{
    explicit OverparameterizedError(const std::string& w)
        : Error(ErrorCategory::overparameterized, w)
    {}
};

} // namespace ocmt
