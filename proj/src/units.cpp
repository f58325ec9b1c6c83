#include "bianiso/types.hpp"

#include <algorithm>

namespace bianiso {

UnitSystem UnitSystem::si() {
    // CODATA 2018
    return {8.8541878128e-12, 1.25663706212e-6};
}

const char* to_string(Direction d) {
    return d == Direction::forward ? "forward" : "backward";
}

LaplacePoint LaplacePoint::harmonic(double omega, Direction dir) {
    const double shift = 1e-8 * std::max(std::abs(omega), 1.0);
    const cplx s = dir == Direction::forward ? cplx{0.0, -omega} : cplx{0.0, omega};
    return {s, shift};
}

}  // namespace bianiso
