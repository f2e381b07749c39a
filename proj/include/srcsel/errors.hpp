#pragma once

#include <stdexcept>
#include <string>

namespace srcsel {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad invocation or configuration. CLI exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data. CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// A training/scoring experiment failed. CLI exit code 3.
class ExperimentError : public Error {
public:
    using Error::Error;
};

/// Raised by the learner (empty training set, divergence).
class LearnerError : public ExperimentError {
public:
    using ExperimentError::ExperimentError;
};

}  // namespace srcsel
