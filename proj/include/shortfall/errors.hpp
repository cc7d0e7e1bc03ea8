#pragma once

#include <stdexcept>
#include <string>

namespace shortfall {

/// Base of every error raised by the toolkit. `category()` is a stable,
/// machine-readable tag used by the command-line front end.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* category() const noexcept { return "error"; }
};

#define SHORTFALL_DEFINE_ERROR(Name, Tag)                                   \
    class Name : public Error {                                             \
    public:                                                                 \
        using Error::Error;                                                 \
        const char* category() const noexcept override { return Tag; }      \
    };

SHORTFALL_DEFINE_ERROR(ParseError, "parse")
SHORTFALL_DEFINE_ERROR(ValidationError, "validation")
SHORTFALL_DEFINE_ERROR(EmptyWindowError, "empty_window")
SHORTFALL_DEFINE_ERROR(InsufficientHistoryError, "insufficient_history")
SHORTFALL_DEFINE_ERROR(NumericalError, "numerical")
SHORTFALL_DEFINE_ERROR(DegenerateTailError, "degenerate_tail")
SHORTFALL_DEFINE_ERROR(ZeroVolatilityError, "zero_volatility")
SHORTFALL_DEFINE_ERROR(ZeroVarianceError, "zero_variance")
SHORTFALL_DEFINE_ERROR(InfeasibleError, "infeasible")
SHORTFALL_DEFINE_ERROR(UnboundedError, "unbounded")
SHORTFALL_DEFINE_ERROR(ZeroVectorError, "zero_vector")
SHORTFALL_DEFINE_ERROR(EmptyRegimeError, "empty_regime")
SHORTFALL_DEFINE_ERROR(UnknownConfidenceError, "unknown_confidence")

#undef SHORTFALL_DEFINE_ERROR

/// Rethrows `error` as the same type with `context` prepended to its message.
[[noreturn]] void rethrow_with_context(const Error& error, const std::string& context);

}  // namespace shortfall
