#ifndef NEUROTOPO_ERRORS_HPP
#define NEUROTOPO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace neurotopo {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape or index mismatch between collections, matrices or vectors.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation was violated.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Non-finite values encountered during evaluation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (IDX, CSV, JSON config).
class FormatError : public Error {
public:
    using Error::Error;
};

/// All points coincide; scale selection is impossible.
class DegenerateCloudError : public Error {
public:
    using Error::Error;
};

/// Simplex budget exceeded while building a complex.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// Complex violates downward closure.
class MalformedComplexError : public Error {
public:
    using Error::Error;
};

/// Rejection sampling failed to produce enough points.
class SamplingError : public Error {
public:
    using Error::Error;
};

} // namespace neurotopo

#endif
