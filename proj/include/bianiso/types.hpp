#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace bianiso {

using cplx = std::complex<double>;

using Tensor3 = Eigen::Matrix3cd;
using RealTensor3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3cd;
using Vec4 = Eigen::Vector4cd;
using Vec6 = Eigen::Matrix<cplx, 6, 1>;
using Mat4 = Eigen::Matrix4cd;
using Mat6 = Eigen::Matrix<cplx, 6, 6>;

inline constexpr cplx kI{0.0, 1.0};

// Vacuum constants of the active unit system. Normalized units set
// eps0 = mu0 = c = 1.
struct UnitSystem {
    double eps0 = 1.0;
    double mu0 = 1.0;

    static UnitSystem normalized() { return {1.0, 1.0}; }
    static UnitSystem si();

    double c() const { return 1.0 / std::sqrt(eps0 * mu0); }
    double impedance() const { return std::sqrt(mu0 / eps0); }
    bool is_normalized() const { return eps0 == 1.0 && mu0 == 1.0; }
};

// Upper sign in the transformed field equations is `forward`.
enum class Direction { forward, backward };

constexpr double sign_of(Direction d) { return d == Direction::forward ? 1.0 : -1.0; }

const char* to_string(Direction d);

// In-plane wave vector k∥ = (kx, ky).
struct KParallel {
    double kx = 0.0;
    double ky = 0.0;

    double norm() const { return std::hypot(kx, ky); }
};

// A point of the Laplace variable. When `limit_shift` is positive, `s` lies on
// the imaginary axis and stands for s + 0⁺; the shift is only used to decide
// on which side of the axis a marginal quantity falls.
struct LaplacePoint {
    cplx s{1.0, 0.0};
    double limit_shift = 0.0;

    static LaplacePoint regular(cplx s) { return {s, 0.0}; }
    // s = -iω + 0⁺ (forward) or s = +iω + 0⁺ (backward).
    static LaplacePoint harmonic(double omega, Direction dir);

    bool on_axis() const { return limit_shift > 0.0; }
    cplx shifted() const { return s + limit_shift; }
};

}  // namespace bianiso
