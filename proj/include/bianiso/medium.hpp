#pragma once

// Causal response tensors of a bi-anisotropic layer and their elimination into
// the (E, H) form used by the field equations.
//
// Constitutive model: P = P_N + χ1 E + χ2 B and M = M_N + χ3 E + χ4 B, with
// B = μ0 (H + M). Laplace-domain tensors are evaluated at Re s > 0, or on the
// imaginary axis in the s + 0⁺ limit.

#include "bianiso/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace bianiso::medium {

// Time-domain tensors at one t >= 0.
struct ChiTime {
    RealTensor3 chi1 = RealTensor3::Zero();
    RealTensor3 chi2 = RealTensor3::Zero();
    RealTensor3 chi3 = RealTensor3::Zero();
    RealTensor3 chi4 = RealTensor3::Zero();
};

// Laplace-domain tensors at one s.
struct ChiSlice {
    Tensor3 chi1 = Tensor3::Zero();
    Tensor3 chi2 = Tensor3::Zero();
    Tensor3 chi3 = Tensor3::Zero();
    Tensor3 chi4 = Tensor3::Zero();
};

// ---------------------------------------------------------------------------
// Oscillator-bath coupling model
// ---------------------------------------------------------------------------

// Reservoir whose couplings share one scalar envelope:
//   f(ω) = sqrt(w(ω)) F,  g(ω) = sqrt(w(ω)) G,  w(ω) = (2a/π) / (ω² + a²).
// Every spectral density is then w(ω) times a constant tensor.
struct EnvelopeReservoir {
    double width = 1.0;  // a
    RealTensor3 f = RealTensor3::Zero();
    RealTensor3 g = RealTensor3::Zero();
};

// Reservoir with couplings tabulated on a strictly increasing ω grid,
// linearly interpolated and zero outside the grid.
struct TabulatedReservoir {
    std::vector<double> omega;
    std::vector<RealTensor3> f;
    std::vector<RealTensor3> g;
};

using Reservoir = std::variant<EnvelopeReservoir, TabulatedReservoir>;

// Spectral densities summed over reservoirs:
//   S1 = Σ f fᵀ,  S4 = Σ g gᵀ,  S2 = Σ f gᵀ   (χ3 uses S2ᵀ).
class CouplingModel {
public:
    CouplingModel() = default;
    explicit CouplingModel(std::vector<Reservoir> reservoirs);

    const std::vector<Reservoir>& reservoirs() const { return reservoirs_; }

private:
    std::vector<Reservoir> reservoirs_;
};

// χ(t) = ∫₀^∞ dω (sin ωt / ω) S(ω), evaluated by adaptive quadrature.
ChiTime susceptibility_time(const CouplingModel& model, double t);

// χ̃(s) = ∫₀^∞ dω S(ω) / (s² + ω²). On-axis points use the s + 0⁺ limit
// (principal value plus the half-residue term).
ChiSlice susceptibility_laplace(const CouplingModel& model, const LaplacePoint& point);

// ---------------------------------------------------------------------------
// Direct Laplace-domain specifications (bypass the coupling integrals)
// ---------------------------------------------------------------------------

// amplitude / (s² + γ s + ω0²); time kernel amplitude·e^{-γt/2} sin(νt)/ν.
struct LorentzPole {
    Tensor3 amplitude = Tensor3::Zero();
    double omega0 = 1.0;
    double gamma = 0.0;
};

// χ2 is never stored: it is χ3ᵀ by construction.
struct PoleModel {
    std::vector<LorentzPole> chi1;
    std::vector<LorentzPole> chi3;
    std::vector<LorentzPole> chi4;
};

// Frequency-independent response, the same tensors at every s. Has no
// time-domain kernel.
struct ConstantModel {
    Tensor3 chi1 = Tensor3::Zero();
    Tensor3 chi3 = Tensor3::Zero();
    Tensor3 chi4 = Tensor3::Zero();

    // Nonmagnetic isotropic medium of refractive index n: χ1 = ε0 (n² - 1) I.
    static ConstantModel isotropic_index(cplx n, double eps0 = 1.0);
};

using SusceptibilityModel = std::variant<CouplingModel, PoleModel, ConstantModel>;

struct SusceptibilitySet {
    std::string layer_id;
    SusceptibilityModel model;

    ChiSlice laplace(const LaplacePoint& point) const;
    ChiTime time(double t) const;
};

ChiSlice susceptibility_laplace(const PoleModel& model, const LaplacePoint& point);
ChiTime susceptibility_time(const PoleModel& model, double t);

// ---------------------------------------------------------------------------
// Elimination of M
// ---------------------------------------------------------------------------

enum class EliminationConvention {
    rederived,  // direct elimination; the only form used by the solver
    printed,    // transcribed formulas kept for comparison reports
};

struct EtaSet {
    Tensor3 eta1 = Tensor3::Zero();
    Tensor3 eta2 = Tensor3::Zero();
    Tensor3 eta3 = Tensor3::Zero();
    Tensor3 eta4 = Tensor3::Zero();
    EliminationConvention convention = EliminationConvention::rederived;
    double condition = 1.0;  // 2-norm condition number of the inverted factor
};

// P = P'_N + η1 E + η2 H,  M = M'_N + η3 E + η4 H.
// Rederived: with A = I - μ0 χ4,
//   η3 = A⁻¹χ3, η4 = μ0 A⁻¹χ4, η1 = χ1 + μ0 χ2 A⁻¹χ3, η2 = μ0 χ2 A⁻¹.
EtaSet eliminate_magnetization(const ChiSlice& chi, double mu0,
                               EliminationConvention convention = EliminationConvention::rederived);

// Classical stand-ins for the noise polarization densities at one point of
// the (k∥, z, s) representation.
struct NoiseSources {
    Vec3 p = Vec3::Zero();
    Vec3 m = Vec3::Zero();
};

// M'_N = A⁻¹ M_N,  P'_N = P_N + μ0 χ2 A⁻¹ M_N.
NoiseSources transform_noise_sources(const ChiSlice& chi, const NoiseSources& raw, double mu0,
                                     EliminationConvention convention = EliminationConvention::rederived);

// Relative mismatch of the coupled B-form relations when P and M are computed
// from the eliminated (E, H) form with the given η and primed sources.
double constitutive_residual(const ChiSlice& chi, const NoiseSources& raw, const EtaSet& eta,
                             const NoiseSources& primed, const Vec3& e, const Vec3& h, double mu0);

struct EliminationComparison {
    double max_difference[4] = {0, 0, 0, 0};  // per η tensor, max |derived - printed|
    double rederived_residual = 0.0;
    double printed_residual = 0.0;
};

EliminationComparison compare_conventions(const ChiSlice& chi, double mu0, const NoiseSources& raw,
                                          const Vec3& e, const Vec3& h);

}  // namespace bianiso::medium
