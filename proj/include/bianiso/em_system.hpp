#pragma once

// Fourier-reduced Maxwell block system and its reduction to the 4×4
// first-order system for Λ = (Ex, Ey, Hx, Hy):
//
//   dΛ/dz ± Θ Λ = G   (upper sign: forward transform)
//
// Field ordering of the 6-component system is (Ex, Ey, Ez, Hx, Hy, Hz).

#include "bianiso/medium.hpp"
#include "bianiso/types.hpp"

namespace bianiso::em {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

// The block operator is D ∂z + K with
//   K = [[T, Y], [Z, W]] (non-derivative parts).
struct BlockSystem {
    Mat6 k = Mat6::Zero();
    KParallel kpar;
    cplx s;
    Direction dir = Direction::forward;

    Tensor3 t_block() const { return k.block<3, 3>(0, 0); }
    Tensor3 y_block() const { return k.block<3, 3>(0, 3); }
    Tensor3 z_block() const { return k.block<3, 3>(3, 0); }
    Tensor3 w_block() const { return k.block<3, 3>(3, 3); }

    // ∂z coefficient pattern: -1 at (0,1) and (3,4), +1 at (1,0) and (4,3).
    static const Mat6& derivative_pattern();
};

BlockSystem assemble_blocks(const medium::EtaSet& eta, const KParallel& kpar, cplx s, Direction dir,
                            const UnitSystem& units);

struct EliminationCoeffs {
    cplx alpha1, beta1, gamma1, delta1;
    cplx alpha2, beta2, gamma2, delta2;
    // (Ez, Hz) source part = source_recovery · (J3, J6).
    Mat2 source_recovery = Mat2::Zero();
    cplx pivot;

    Eigen::Matrix<cplx, 2, 4> matrix() const;
};

struct ThetaSystem {
    Mat4 theta = Mat4::Zero();
    EliminationCoeffs coeffs;
    BlockSystem blocks;
};

// Solves the two algebraic rows for (Ez, Hz) and substitutes them into the
// four transverse rows. Throws degenerate-longitudinal when the pivot
// T33 W33 - Z33 Y33 vanishes.
ThetaSystem eliminate_longitudinal(const BlockSystem& blocks);

// Six-component source of the block system:
//   J = [∓ μ0 s M'_N ± B(0);  ± s P'_N ∓ D(0)].
Vec6 source_vector(const medium::NoiseSources& primed, const Vec3& b0, const Vec3& d0, cplx s, Direction dir,
                   const UnitSystem& units);

Vec4 reduce_source(const ThetaSystem& system, const Vec6& j);

// (Ez, Hz) from Λ and the source.
Vec2 recover_longitudinal(const ThetaSystem& system, const Vec4& lambda, const Vec6& j);

// Convenience: eliminate + assemble + reduce in one step.
ThetaSystem theta_system(const medium::EtaSet& eta, const KParallel& kpar, cplx s, Direction dir,
                         const UnitSystem& units);

}  // namespace bianiso::em
