#pragma once

// Field synthesis: free-space source data from classical mode amplitudes,
// z-profiles of a stack solution, and the inverse transform back to time.

#include "bianiso/stack_solver.hpp"

#include <array>
#include <vector>

namespace bianiso::synthesis {

// Transverse polarization basis of wave vector k: e1 = ẑ × k̂ (x̂ when k ∥ ẑ),
// e2 = k̂ × e1, e3 = k̂.
std::array<Eigen::Vector3d, 3> polarization_basis(const Eigen::Vector3d& k);

// Classical amplitudes a_{kλ}(0) on one k∥ line. `plus[i]` holds the two
// polarizations at k = (kx, ky, kz_i); `minus[i]` those at -k.
struct FreeSpaceAmplitudes {
    KParallel kpar;
    std::vector<double> kz;  // uniform, increasing
    std::vector<std::array<cplx, 2>> plus;
    std::vector<std::array<cplx, 2>> minus;

    void validate() const;
};

// Initial-field spectra D̲(k∥, z), B̲(k∥, z) for one transform direction.
struct InitialSpectra {
    Vec3 d = Vec3::Zero();
    Vec3 b = Vec3::Zero();
};

// kz integrals of the mode expansion, by trapezoidal quadrature. Throws
// resolution when the amplitudes do not vanish at the grid edges or when the
// half-resolution estimate differs by more than 1e-8 of the result.
InitialSpectra initial_spectra(const FreeSpaceAmplitudes& amps, double z, Direction dir, const UnitSystem& units);

// Q(k∥, kz_i, s): the reduced source carried by one kz sample.
Vec4 q_vector(const FreeSpaceAmplitudes& amps, std::size_t i, cplx s, Direction dir, const UnitSystem& units);

// G(z) = ∫ dkz Q e^{±i kz z}.
Vec4 free_space_drive(const FreeSpaceAmplitudes& amps, cplx s, double z, Direction dir, const UnitSystem& units);

// Free-space particular solution ∫ dkz e^{±ikz z} (±ikz I ± Θ⁰)⁻¹ Q, for Re s > 0.
Vec4 free_space_particular(const FreeSpaceAmplitudes& amps, cplx s, double z, Direction dir,
                           const UnitSystem& units);

struct FieldFrame {
    std::vector<double> axis;  // z (profiles) or t (time series)
    std::vector<Vec3> e;
    std::vector<Vec3> h;
    Direction dir = Direction::forward;
    bool both_directions = false;
};

// Λ(z) region by region with (Ez, Hz) appended. `sources` gives the six
// component source at z (nullptr: none).
FieldFrame field_profile(const stack::StackSolution& solution, const std::vector<double>& zgrid,
                         const std::function<Vec6(double)>& sources = nullptr);

// Six-component source J(z) of the block system for one transform direction.
using BlockSource = std::function<Vec6(double)>;

// Solves the stack with J reduced region by region as the drive, then returns
// the fields on zgrid.
FieldFrame driven_profile(const stack::LayerStack& stack, const KParallel& kpar, const LaplacePoint& point,
                          Direction dir, const UnitSystem& units, const BlockSource& j,
                          const std::vector<double>& zgrid);

// Uniform symmetric frequency grid ω_k = (k - (N-1)/2) Δω. An even N keeps
// ω = 0 off the grid.
std::vector<double> symmetric_grid(double d_omega, int count);

struct TimeOptions {
    bool raised_cosine = false;
    double edge_tolerance = 1e-6;  // edge spectrum / peak spectrum
};

// (1/2π) Σ_k w_k e^{-iω_k t} [F(ω_k) e^{ik∥·r∥} + B(ω_k) e^{-ik∥·r∥}],
// trapezoid weights on the symmetric grid. F and B hold (E, H) spectra at the
// forward point -iω + 0⁺ and the backward point iω + 0⁺ of each sample.
FieldFrame time_reconstruct(const std::vector<double>& omegas, const std::vector<Vec6>& forward,
                            const std::vector<Vec6>& backward, const KParallel& kpar,
                            const Eigen::Vector2d& rpar, const std::vector<double>& times,
                            const TimeOptions& options = {});

}  // namespace bianiso::synthesis
