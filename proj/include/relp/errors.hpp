#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid input data. Row/column are 0-based positions in the
/// data grid (after any header row / label column), or npos when unknown.
class DataError : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit DataError(const std::string& what, std::size_t row = npos, std::size_t col = npos);

    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Not enough observed periods for the requested computation.
class HistoryError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// The feasibility condition max_i x_i > kappa * sigma + lambda does not hold.
class ConditionError : public Error {
public:
    using Error::Error;
};

/// A strategy produced a vector that is not on the probability simplex.
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace relp
