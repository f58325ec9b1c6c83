#include "bianiso/em_system.hpp"

#include "bianiso/errors.hpp"

#include <array>

namespace bianiso::em {

namespace {

constexpr std::array<int, 4> kTransverse{0, 1, 3, 4};
constexpr std::array<int, 2> kLongitudinal{2, 5};

// Inverse of the ∂z pattern restricted to the transverse rows/columns.
Mat4 inverse_transverse_pattern() {
    Mat4 d = Mat4::Zero();
    d(0, 1) = 1.0;
    d(1, 0) = -1.0;
    d(2, 3) = 1.0;
    d(3, 2) = -1.0;
    return d;
}

void add_curl(Mat6& k, int offset, const KParallel& kp) {
    const cplx iky = kI * kp.ky;
    const cplx ikx = kI * kp.kx;
    k(offset + 0, offset + 2) += iky;
    k(offset + 2, offset + 0) -= iky;
    k(offset + 1, offset + 2) -= ikx;
    k(offset + 2, offset + 1) += ikx;
}

}  // namespace

const Mat6& BlockSystem::derivative_pattern() {
    static const Mat6 d = [] {
        Mat6 m = Mat6::Zero();
        m(0, 1) = -1.0;
        m(1, 0) = 1.0;
        m(3, 4) = -1.0;
        m(4, 3) = 1.0;
        return m;
    }();
    return d;
}

Eigen::Matrix<cplx, 2, 4> EliminationCoeffs::matrix() const {
    Eigen::Matrix<cplx, 2, 4> c;
    c << alpha1, beta1, gamma1, delta1, alpha2, beta2, gamma2, delta2;
    return c;
}

BlockSystem assemble_blocks(const medium::EtaSet& eta, const KParallel& kpar, cplx s, Direction dir,
                            const UnitSystem& units) {
    BlockSystem b;
    b.kpar = kpar;
    b.s = s;
    b.dir = dir;
    const double mu0 = units.mu0;
    const double eps0 = units.eps0;
    Mat6& k = b.k;
    k.block<3, 3>(0, 0) = mu0 * s * eta.eta3;
    k.block<3, 3>(0, 3) = mu0 * s * (Tensor3::Identity() + eta.eta4);
    k.block<3, 3>(3, 0) = -s * (eps0 * Tensor3::Identity() + eta.eta1);
    k.block<3, 3>(3, 3) = -s * eta.eta2;
    add_curl(k, 0, kpar);
    // W carries the same curl pattern, acting on H.
    k(3, 5) += kI * kpar.ky;
    k(5, 3) -= kI * kpar.ky;
    k(4, 5) -= kI * kpar.kx;
    k(5, 4) += kI * kpar.kx;
    if (dir == Direction::backward) k = -k;
    if (!k.allFinite()) throw Error(ErrorKind::overflow, "block system has non-finite entries");
    return b;
}

ThetaSystem eliminate_longitudinal(const BlockSystem& blocks) {
    const Mat6& k = blocks.k;
    Eigen::Matrix<cplx, 4, 4> ktt;
    Eigen::Matrix<cplx, 4, 2> ktl;
    Eigen::Matrix<cplx, 2, 4> klt;
    Mat2 kll;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) ktt(r, c) = k(kTransverse[r], kTransverse[c]);
        for (int c = 0; c < 2; ++c) ktl(r, c) = k(kTransverse[r], kLongitudinal[c]);
    }
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) klt(r, c) = k(kLongitudinal[r], kTransverse[c]);
        for (int c = 0; c < 2; ++c) kll(r, c) = k(kLongitudinal[r], kLongitudinal[c]);
    }
    const cplx pivot = kll(0, 0) * kll(1, 1) - kll(1, 0) * kll(0, 1);
    const double scale = kll.cwiseAbs().maxCoeff();
    if (!(std::abs(pivot) > 1e-14 * scale * scale) || !std::isfinite(std::abs(pivot)))
        throw Error(ErrorKind::degenerate_longitudinal, "longitudinal pivot T33 W33 - Z33 Y33 vanishes",
                    std::abs(pivot));
    Mat2 inv;
    inv << kll(1, 1), -kll(0, 1), -kll(1, 0), kll(0, 0);
    inv /= pivot;

    ThetaSystem out;
    out.blocks = blocks;
    const Eigen::Matrix<cplx, 2, 4> c = -inv * klt;
    auto& co = out.coeffs;
    co.alpha1 = c(0, 0);
    co.beta1 = c(0, 1);
    co.gamma1 = c(0, 2);
    co.delta1 = c(0, 3);
    co.alpha2 = c(1, 0);
    co.beta2 = c(1, 1);
    co.gamma2 = c(1, 2);
    co.delta2 = c(1, 3);
    co.source_recovery = inv;
    co.pivot = pivot;

    const Mat4 schur = ktt + ktl * c;
    out.theta = sign_of(blocks.dir) * (inverse_transverse_pattern() * schur);
    return out;
}

Vec6 source_vector(const medium::NoiseSources& primed, const Vec3& b0, const Vec3& d0, cplx s, Direction dir,
                   const UnitSystem& units) {
    const double sg = sign_of(dir);
    Vec6 j;
    j.head<3>() = sg * (-units.mu0 * s * primed.m + b0);
    j.tail<3>() = sg * (s * primed.p - d0);
    return j;
}

Vec4 reduce_source(const ThetaSystem& system, const Vec6& j) {
    const Mat6& k = system.blocks.k;
    const Vec2 jl(j(2), j(5));
    const Vec2 zl = system.coeffs.source_recovery * jl;
    Vec4 rhs;
    for (int r = 0; r < 4; ++r) {
        const int row = kTransverse[r];
        rhs(r) = j(row) - k(row, 2) * zl(0) - k(row, 5) * zl(1);
    }
    return inverse_transverse_pattern() * rhs;
}

Vec2 recover_longitudinal(const ThetaSystem& system, const Vec4& lambda, const Vec6& j) {
    const Vec2 jl(j(2), j(5));
    return system.coeffs.matrix() * lambda + system.coeffs.source_recovery * jl;
}

ThetaSystem theta_system(const medium::EtaSet& eta, const KParallel& kpar, cplx s, Direction dir,
                         const UnitSystem& units) {
    return eliminate_longitudinal(assemble_blocks(eta, kpar, s, dir, units));
}

}  // namespace bianiso::em
