#pragma once

// Layer stacks: per-region mode solutions, particular solutions for
// distributed sources, and interface matching.
//
// Geometry: a left half-space (z < 0), N finite layers, and a right
// half-space. The first interface sits at z = 0.

#include "bianiso/em_system.hpp"
#include "bianiso/medium.hpp"
#include "bianiso/mode_solver.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace bianiso::stack {

struct Layer {
    double thickness = 0.0;
    medium::SusceptibilitySet medium;
};

struct LayerStack {
    medium::SusceptibilitySet left;
    std::vector<Layer> layers;
    medium::SusceptibilitySet right;

    void validate() const;
    // Interface positions z_0 = 0, z_1, ..., z_N.
    std::vector<double> interfaces() const;
    int region_count() const { return int(layers.size()) + 2; }
    const medium::SusceptibilitySet& region_medium(int r) const;
};

// One region evaluated at (k∥, s) for one transform direction.
struct RegionSystem {
    em::ThetaSystem system;
    modes::ModeBasis basis;
    Direction dir = Direction::forward;
    double z_lo = 0.0;  // -inf for the left half-space
    double z_hi = 0.0;  // +inf for the right half-space

    // Λ ∝ exp(κ z) with κ = ∓Ω.
    cplx kappa(int j) const { return -sign_of(dir) * basis.omega[j]; }
    // True if mode j vanishes as z → +∞ for this direction.
    bool decays_plus(int j) const;
    // Exponential anchor of mode j (the factor is exp(κ (z - anchor))).
    double anchor(int j) const;
};

RegionSystem prepare_region(const medium::SusceptibilitySet& chi, const KParallel& kpar, const LaplacePoint& point,
                            Direction dir, const UnitSystem& units, double z_lo, double z_hi);

// Σ C_j R_j exp(∓Ω_j z). Throws overflow when an exponent exceeds 700.
Vec4 general_solution(const modes::ModeBasis& basis, const Vec4& coeffs, double z, Direction dir);

// Reduced source G(z) of one region.
struct RegionDrive {
    std::function<Vec4(double)> g;
    explicit operator bool() const { return bool(g); }
};

// Λ_p(z) solving dΛ/dz ± ΘΛ = G inside the region, built mode by mode from
// the one-sided exponential kernel (decaying side of each mode).
Vec4 particular_solution(const RegionSystem& region, const RegionDrive& drive, double z);

// Known coefficients on incoming modes of the two half-spaces, indexed by
// mode number of the respective basis. Entries on outgoing modes are ignored.
struct IncidentData {
    Vec4 left = Vec4::Zero();
    Vec4 right = Vec4::Zero();
};

struct StackSolution {
    std::vector<RegionSystem> regions;
    std::vector<Vec4> coeffs;       // solved coefficients; forbidden entries of half-spaces are 0
    std::vector<RegionDrive> drives;
    IncidentData incident;
    std::vector<double> interfaces;
    Direction dir = Direction::forward;
    KParallel kpar;
    LaplacePoint point;
    double rcond = 1.0;

    int region_of(double z) const;
    Vec4 lambda(double z) const;
    Vec4 lambda(double z, int region) const;
    Vec4 homogeneous(double z, int region) const;
    Vec4 incident_part(double z, int region) const;
    // Longitudinal pair (Ez, Hz) from the solution; j is the six-component
    // source at z (zero when absent).
    em::Vec2 longitudinal(double z, int region, const Vec6& j = Vec6::Zero()) const;
    double max_interface_jump() const;
    // True when every coefficient on a forbidden half-space mode is exactly 0.
    bool decay_conditions_hold() const;
};

// Builds and solves the global (4N + 4) interface system.
StackSolution match_slab(const LayerStack& stack, const KParallel& kpar, const LaplacePoint& point, Direction dir,
                         const UnitSystem& units, const std::vector<RegionDrive>& drives = {},
                         const IncidentData& incident = {});

struct ScatterResult {
    double omega = 0.0;
    KParallel kpar;
    // Rows: outgoing (s, p); columns: incident (s, p). s entries are the
    // tangential E along ŝ, p entries the tangential H along ŝ times the
    // vacuum impedance. Transmission is referenced to the last interface.
    em::Mat2 r = em::Mat2::Zero();
    em::Mat2 t = em::Mat2::Zero();
    // Reflected and transmitted power fractions per incident polarization.
    double reflectance[2] = {0, 0};
    double transmittance[2] = {0, 0};
};

// Unit ŝ = ẑ × k̂∥ (ŷ at normal incidence).
Eigen::Vector3d s_direction(const KParallel& kpar);

// Harmonic scattering at s = -iω + 0⁺ with vacuum half-spaces.
ScatterResult scattering_matrices(const LayerStack& stack, const KParallel& kpar, double omega,
                                  const UnitSystem& units);

}  // namespace bianiso::stack
