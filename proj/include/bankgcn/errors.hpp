#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bankgcn {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed graph input: index out of range, negative weight, bad permutation.
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Dense eigendecomposition requested on a graph above the oracle size limit.
class OracleSizeError : public Error {
public:
    using Error::Error;
};

/// TU text file could not be parsed. Carries the file and 1-based line.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Dataset cannot be split under the requested stratification.
class SplitError : public Error {
public:
    using Error::Error;
};

/// Invalid run or training configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Checkpoint bytes are not a readable container.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Non-finite objective or gradient during training.
class TrainingFault : public Error {
public:
    using Error::Error;
};

}  // namespace bankgcn
