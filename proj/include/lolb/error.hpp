#pragma once

#include <stdexcept>
#include <string>

namespace lolb {

// Base of every library error. Validation-class errors map to CLI exit code 1,
// everything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool is_validation() const noexcept { return false; }
};

class ValidationError : public Error {
public:
    using Error::Error;
    bool is_validation() const noexcept override { return true; }
};

/// Image carries the wrong colour-domain tag for the requested operation.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientFramesError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The requested mean luminance cannot be reached even with the strongest curve.
class UnreachableExposureError : public Error {
public:
    UnreachableExposureError(double target, double achievable_min)
        : Error("target mean luminance " + std::to_string(target) +
                " is unreachable; darkest achievable mean is " + std::to_string(achievable_min)),
          target_(target), achievable_min_(achievable_min) {}

    double target() const noexcept { return target_; }
    double achievable_min() const noexcept { return achievable_min_; }

private:
    double target_;
    double achievable_min_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Non-finite gradient or loss. `where` names the parameter or op that produced it.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(std::string where, long step)
        : Error("training diverged at step " + std::to_string(step) + ": non-finite value in " + where),
          where_(std::move(where)), step_(step) {}

    const std::string& where() const noexcept { return where_; }
    long step() const noexcept { return step_; }

private:
    std::string where_;
    long step_;
};

}  // namespace lolb
