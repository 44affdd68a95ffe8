// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace relaybf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A vector/matrix length does not match the configured topology.
class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// A power or noise parameter that must be strictly positive is not.
class NonpositiveParameterError : public Error {
public:
    using Error::Error;
};

/// An operation was invoked on data built for the other topology.
class TopologyMismatchError : public Error {
public:
    using Error::Error;
};

/// A matrix required to be positive semidefinite is not (beyond tolerance).
class NotPsdError : public Error {
public:
    using Error::Error;
};

class IndexOutOfRangeError : public Error {
public:
    using Error::Error;
};

/// The SINR bisection has no finite upper bound (budget matrix singular).
class UnboundedInstanceError : public Error {
public:
    using Error::Error;
};

/// The interior-point method stalled; never silently treated as infeasible.
class NumericalFailureError : public Error {
public:
    using Error::Error;
};

/// Argument outside a formula's domain (e.g. rank < 1, fewer than 2 antennas).
class MathDomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedModulationError : public Error {
public:
    using Error::Error;
};

} // namespace relaybf
