#pragma once

#include <stdexcept>
#include <string>

namespace algan {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shape or axis mismatch.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Mathematically invalid input (log of a non-positive value, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or violated precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; message carries the offending line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Data contract violation (e.g. anomalous rows in a training file).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or gradient during training.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Degenerate metric input (single-class AUROC, empty score set).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace algan
