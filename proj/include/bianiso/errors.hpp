#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bianiso {

enum class ErrorKind {
    invalid_argument,
    quadrature,
    elimination,
    degenerate_longitudinal,
    mode_degeneracy,
    geometry,
    ill_conditioned,
    overflow,
    resolution,
    range,
    stiffness,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the solver carries a kind and, where one exists,
// the offending number (pivot, condition estimate, resonant frequency, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          double value = std::numeric_limits<double>::quiet_NaN());

    ErrorKind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }

private:
    ErrorKind kind_;
    double value_;
};

}  // namespace bianiso
