#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace advreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

// Error hierarchy. Everything derives from std::runtime_error or
// std::invalid_argument so callers that only care about "it failed" can
// catch the standard types.

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A column of the design matrix is identically zero and cannot be rescaled.
class RescaleError : public std::runtime_error {
public:
    RescaleError(Index column, const std::string& what)
        : std::runtime_error(what), column_(column) {}
    Index column() const noexcept { return column_; }

private:
    Index column_;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedVariant : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when an operation needs the noise vector and it is not available.
class OracleUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries 1-based row/column of the offending cell.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : std::runtime_error(what), row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Variant { classic, group };

inline const char* to_string(Variant v) { return v == Variant::classic ? "classic" : "group"; }

inline Variant parse_variant(const std::string& s)
{
    if (s == "classic") return Variant::classic;
    if (s == "group") return Variant::group;
    throw InvalidArgument("unknown variant '" + s + "' (expected classic or group)");
}

}  // namespace advreg
