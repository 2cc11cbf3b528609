#pragma once

#include <stdexcept>
#include <string>

namespace lppi {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Invalid configuration or argument combination.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Operation requires an exponential-family observation model.
class UnsupportedFamilyError : public Error
{
public:
    using Error::Error;
};

/// Malformed input file; the message names the offending row/column.
class LoadError : public Error
{
public:
    using Error::Error;
};

/// Draws or data failed a structural check.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Mismatch between draws and dataset columns.
class AlignmentError : public Error
{
public:
    using Error::Error;
};

/// An iterative solver did not converge.
class ConvergenceError : public Error
{
public:
    using Error::Error;
};

} // namespace lppi
