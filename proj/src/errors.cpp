#include "bianiso/errors.hpp"

#include <cmath>
#include <cstdio>

namespace bianiso {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::quadrature: return "quadrature";
    case ErrorKind::elimination: return "elimination";
    case ErrorKind::degenerate_longitudinal: return "degenerate-longitudinal";
    case ErrorKind::mode_degeneracy: return "mode-degeneracy";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::ill_conditioned: return "ill-conditioned-matching";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::range: return "range";
    case ErrorKind::stiffness: return "stiffness";
    }
    return "unknown";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, double value) {
    std::string out = std::string(to_string(kind)) + ": " + message;
    if (!std::isnan(value)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, " [%.6g]", value);
        out += buf;
    }
    return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, double value)
    : std::runtime_error(compose(kind, message, value)),
      kind_(kind),
      value_(value) {}

}  // namespace bianiso
