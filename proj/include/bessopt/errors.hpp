#pragma once

#include <stdexcept>
#include <string>

namespace bessopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed network data: dangling references, duplicate ids, bad ranges.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Newton-Raphson did not reach tolerance.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double mismatch, int iterations)
        : Error(what), mismatch_(mismatch), iterations_(iterations) {}
    double mismatch() const noexcept { return mismatch_; }
    int iterations() const noexcept { return iterations_; }

private:
    double mismatch_;
    int iterations_;
};

/// Failure of a single time step (singular network or fixed-point stall).
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// State became non-finite during integration.
class BlowUpError : public SimulationError {
public:
    using SimulationError::SimulationError;
};

/// Subspace rank too small for the requested model order.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Non-finite intermediate value in a numerical routine.
class NumericError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Named channel, bundled case or scenario not found.
class LookupError : public Error {
public:
    using Error::Error;
};

/// No identified mode inside the requested frequency band.
class TargetMissingError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration (run file, case file, CLI flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace bessopt
