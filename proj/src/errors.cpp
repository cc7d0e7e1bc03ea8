#include "shortfall/errors.hpp"

namespace shortfall {

namespace {

template <typename E>
bool rethrow_as(const Error& error, const std::string& message) {
    if (dynamic_cast<const E*>(&error) == nullptr) return false;
    throw E(message);
}

}  // namespace

void rethrow_with_context(const Error& error, const std::string& context) {
    const std::string message = context + ": " + error.what();
    rethrow_as<ParseError>(error, message) || rethrow_as<ValidationError>(error, message) ||
        rethrow_as<EmptyWindowError>(error, message) || rethrow_as<InsufficientHistoryError>(error, message) ||
        rethrow_as<NumericalError>(error, message) || rethrow_as<DegenerateTailError>(error, message) ||
        rethrow_as<ZeroVolatilityError>(error, message) || rethrow_as<ZeroVarianceError>(error, message) ||
        rethrow_as<InfeasibleError>(error, message) || rethrow_as<UnboundedError>(error, message) ||
        rethrow_as<ZeroVectorError>(error, message) || rethrow_as<EmptyRegimeError>(error, message) ||
        rethrow_as<UnknownConfidenceError>(error, message);
    throw Error(message);
}

}  // namespace shortfall
