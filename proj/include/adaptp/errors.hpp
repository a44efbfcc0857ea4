// Errors - exception types shared across the toolkit
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <stdexcept>
#include <string>

namespace adaptp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (altitude range, Mach, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A root or crossing that should exist could not be found.
class NotFoundError : public Error {
  public:
    using Error::Error;
};

/// Malformed input data: CSV rows, record files, blip cadence.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Performance-model integration cannot achieve the requested phase.
class DivergenceError : public Error {
  public:
    using Error::Error;
};

/// A rollout produced a non-finite state.
class OverflowError : public Error {
  public:
    OverflowError(const std::string &what, long step)
        : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

  private:
    long step_;
};

/// Input rank-deficient for a least-squares fit.
class DegenerateInputError : public Error {
  public:
    using Error::Error;
};

/// System identification failed on every restart.
class FitFailureError : public Error {
  public:
    FitFailureError(const std::string &what, std::string trajectory_id)
        : Error(what), trajectory_id_(std::move(trajectory_id)) {}
    const std::string &trajectory_id() const noexcept { return trajectory_id_; }

  private:
    std::string trajectory_id_;
};

/// Numerical breakdown (singular innovation covariance and similar).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Truth quantities undefined for a trajectory (target never reached).
class TruthUndefinedError : public Error {
  public:
    using Error::Error;
};

} // namespace adaptp
