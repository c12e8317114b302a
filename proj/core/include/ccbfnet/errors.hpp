#pragma once

#include <stdexcept>
#include <string>

namespace ccbfnet {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument value (unknown node id, negative gain, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Shape or dimension mismatch between coupled objects.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A numeric evaluation left the representable domain (NaN/Inf).
/// The message names the offending term.
class NumericalDomainError : public Error {
public:
    using Error::Error;
};

/// A feasible set required to be nonempty is empty.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Control dimension exceeds the exact-enumeration limit.
class UnsupportedDimensionError : public Error {
public:
    using Error::Error;
};

/// A computation whose well-posedness assumption is violated
/// (e.g. a zero entry in the control-effect gradient).
class IllPosedError : public Error {
public:
    using Error::Error;
};

/// Two quantities that must agree by contract do not.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// State integration produced a non-finite value.
class IntegrationBlowupError : public Error {
public:
    IntegrationBlowupError(const std::string& what, double t)
        : Error(what), time(t) {}
    double time;
};

}  // namespace ccbfnet
