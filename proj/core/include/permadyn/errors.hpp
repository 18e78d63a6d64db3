#ifndef PERMADYN_ERRORS_HPP
#define PERMADYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace permadyn {

/// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MatrixTooLarge : Error {
    explicit MatrixTooLarge(const std::string& msg) : Error(msg) {}
};

struct InvalidEntry : Error {
    explicit InvalidEntry(const std::string& msg) : Error(msg) {}
};

struct FactorizationFailed : Error {
    explicit FactorizationFailed(const std::string& msg) : Error(msg) {}
};

struct NegativeSemimetric : Error {
    explicit NegativeSemimetric(const std::string& msg) : Error(msg) {}
};

struct DegenerateWeight : Error {
    explicit DegenerateWeight(const std::string& msg) : Error(msg) {}
};

struct UnvalidatedFormula : Error {
    explicit UnvalidatedFormula(const std::string& msg) : Error(msg) {}
};

struct RateOverflow : Error {
    explicit RateOverflow(const std::string& msg) : Error(msg) {}
};

struct StateSpaceTooLarge : Error {
    explicit StateSpaceTooLarge(const std::string& msg) : Error(msg) {}
};

struct UnresolvableScale : Error {
    explicit UnresolvableScale(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace permadyn

#endif
