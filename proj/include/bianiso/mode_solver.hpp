#pragma once

// Eigenmodes of Θ. Inside a layer the homogeneous solution is
// Σ C_j R_j exp(∓Ω_j z) (upper sign: forward transform).

#include "bianiso/types.hpp"

#include <array>

namespace bianiso::modes {

// Classification refers to the forward factor exp(-Ω z).
enum class ModeClass { decays_toward_plus_infinity, decays_toward_minus_infinity, marginal };

const char* to_string(ModeClass c);

struct ModeBasis {
    std::array<cplx, 4> omega{};
    Mat4 vectors = Mat4::Zero();  // column j is R_j
    std::array<ModeClass, 4> classes{};
    double theta_norm = 0.0;
    double condition = 1.0;  // of the eigenvector matrix

    Vec4 vector(int j) const { return vectors.col(j); }
    int count(ModeClass c) const;
};

// Full eigendecomposition of a general complex Θ. Eigenvalues are sorted by
// Re Ω, then Im Ω. Modes with |Re Ω| <= 1e-9 ‖Θ‖ are tagged marginal.
// Throws mode-degeneracy for defective or near-defective Θ.
ModeBasis eigenmodes(const Mat4& theta);

// Re-tags marginal modes from the eigenvalues of Θ evaluated at a point
// shifted slightly into Re s > 0.
void resolve_marginal(ModeBasis& basis, const Mat4& shifted_theta);

// Closed-form vacuum Θ.
Mat4 vacuum_theta(const KParallel& kpar, cplx s, const UnitSystem& units);

// Closed-form vacuum eigenpairs: Ω = ∓sqrt(kx² + ky² + s² ε0 μ0), each double,
// with the tabulated eigenvectors (not normalized).
ModeBasis vacuum_modes(const KParallel& kpar, cplx s, const UnitSystem& units);

// Spectral projector onto the span of the given eigenvector columns, along the
// remaining eigenvectors of the same basis.
Mat4 spectral_projector(const Mat4& vectors, const std::array<bool, 4>& select);

}  // namespace bianiso::modes
