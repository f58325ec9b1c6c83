#pragma once

// Independent ground truth for the solver: closed-form slab optics, a direct
// ODE integrator, a 6×6 residual checker built from the Levi-Civita form of
// the block operator, and literal transcriptions of the tabulated elimination
// formulas. Nothing here calls into em_system, mode_solver or stack_solver
// except to read plain matrices handed in by the caller.

#include "bianiso/medium.hpp"
#include "bianiso/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bianiso::oracle {

enum class Polarization { s, p };

struct SlabResponse {
    cplx r;
    cplx t;
};

// Isotropic nonmagnetic slab of index n and thickness d in vacuum, plane wave
// at angle theta. p coefficients are ratios of tangential H.
SlabResponse fresnel_airy(cplx n, double d, double omega, double theta, Polarization pol,
                          const UnitSystem& units = UnitSystem::normalized());

struct IntegrationStats {
    int steps = 0;
    int rejected = 0;
};

// dΛ/dz = ∓ Θ Λ + G(z) from z0 to z1 by classical RK4 with step doubling;
// each accepted step has local error below `tolerance` (relative to 1 + |Λ|).
Vec4 integrate_layer(const Mat4& theta, const std::function<Vec4(double)>& g, const Vec4& lambda0, double z0,
                     double z1, Direction dir, double tolerance = 1e-10, IntegrationStats* stats = nullptr);

// Max-norm residual of the six reduced equations on a uniform z grid,
// divided by 1 + max |field|. fields[i] = (Ex, Ey, Ez, Hx, Hy, Hz) at
// zgrid[i]; sources[i] is J at the same point (empty: zero).
double residual_full_system(const std::vector<double>& zgrid, const std::vector<Vec6>& fields,
                            const medium::EtaSet& eta, const KParallel& kpar, cplx s, Direction dir,
                            const UnitSystem& units, const std::vector<Vec6>& sources = {});

// Exact homogeneous vacuum solution exp(κ z) with κ = ±sqrt(k∥² + s² ε0 μ0).
struct VacuumPlaneWave {
    cplx kappa;
    Vec3 e0;
    Vec3 h0;
    Vec6 at(double z) const;
};

VacuumPlaneWave vacuum_plane_wave(const KParallel& kpar, cplx s, Direction dir, bool plus_branch, const Vec3& seed,
                                  const UnitSystem& units = UnitSystem::normalized());

// Literal transcriptions of the tabulated coefficient, Θ, and source
// formulas, evaluated from the forward-version non-derivative blocks.
struct PrintedCoeffs {
    cplx alpha1, beta1, gamma1, delta1;
    cplx alpha2, beta2, gamma2, delta2;
};

// `k_forward` is the non-derivative 6×6 matrix [[T, Y], [Z, W]] of the
// forward transform.
PrintedCoeffs printed_elimination_coeffs(const Mat6& k_forward);
Mat4 printed_theta(const Mat6& k_forward, const medium::EtaSet& eta, cplx s, double mu0);
Vec4 printed_source(const Mat6& k_forward, const Vec6& j);

// The tabulated vacuum Θ, written out independently of mode_solver.
Mat4 printed_vacuum_theta(const KParallel& kpar, cplx s, const UnitSystem& units);

struct OracleReport {
    std::string scenario;
    std::vector<cplx> oracle;
    std::vector<cplx> solver;
    double abs_error = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool relative = false;  // which error the tolerance applies to
    bool pass = false;
};

OracleReport compare(std::string scenario, std::vector<cplx> oracle, std::vector<cplx> solver, double tolerance,
                     bool relative);

}  // namespace bianiso::oracle
