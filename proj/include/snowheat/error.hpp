#pragma once

#include <stdexcept>
#include <string>

namespace snowheat {

/// Bad argument or precondition violation. The CLI maps this to exit code 2.
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Polygon that fails a geometric precondition (not simple, not closed, ...).
class InvalidDomain : public InvalidParameter {
public:
    explicit InvalidDomain(const std::string& what) : InvalidParameter(what) {}
};

/// Argument outside the mathematical domain of a function (e.g. log log log x <= 0).
class DomainError : public InvalidParameter {
public:
    explicit DomainError(const std::string& what) : InvalidParameter(what) {}
};

/// A configured size cap (segments, cells, population) would be exceeded.
/// The CLI maps this to exit code 3.
class ResourceCap : public std::runtime_error {
public:
    explicit ResourceCap(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical guard tripped (e.g. explicit scheme left [0, 1]).
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidParameter(msg);
}
}  // namespace detail

}  // namespace snowheat
