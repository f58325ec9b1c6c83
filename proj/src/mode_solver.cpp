#include "bianiso/mode_solver.hpp"

#include "bianiso/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <vector>

namespace bianiso::modes {

namespace {

constexpr double kClusterTol = 1e-10;   // relative spread treated as exact degeneracy
constexpr double kNullTol = 1e-8;       // relative singular value counted as null
constexpr double kMarginalTol = 1e-9;
constexpr double kResidualTol = 1e-10;
constexpr double kMaxCondition = 1e12;

Vec4 normalized(Vec4 v) {
    const double peak = v.cwiseAbs().maxCoeff();
    if (peak == 0.0) return v;
    v /= peak;
    for (int i = 0; i < 4; ++i) {
        if (std::abs(v(i)) > 1e-10) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = std::abs(v(i));
            break;
        }
    }
    return v;
}

ModeClass classify(cplx omega, double norm) {
    if (omega.real() > kMarginalTol * norm) return ModeClass::decays_toward_plus_infinity;
    if (omega.real() < -kMarginalTol * norm) return ModeClass::decays_toward_minus_infinity;
    return ModeClass::marginal;
}

double condition_number(const Mat4& v) {
    Eigen::JacobiSVD<Mat4> svd(v);
    const auto& sv = svd.singularValues();
    if (sv(3) == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / sv(3);
}

}  // namespace

const char* to_string(ModeClass c) {
    switch (c) {
    case ModeClass::decays_toward_plus_infinity: return "decays_toward_+inf";
    case ModeClass::decays_toward_minus_infinity: return "decays_toward_-inf";
    case ModeClass::marginal: return "marginal";
    }
    return "unknown";
}

int ModeBasis::count(ModeClass c) const {
    return int(std::count(classes.begin(), classes.end(), c));
}

ModeBasis eigenmodes(const Mat4& theta) {
    if (!theta.allFinite()) throw Error(ErrorKind::invalid_argument, "Θ has non-finite entries");
    ModeBasis out;
    const double norm = theta.norm();
    out.theta_norm = norm;
    if (norm == 0.0) {
        // Θ = 0: every direction is an eigenvector with Ω = 0.
        out.vectors = Mat4::Identity();
        out.classes.fill(ModeClass::marginal);
        return out;
    }

    Eigen::ComplexEigenSolver<Mat4> es(theta, true);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::mode_degeneracy, "eigensolver did not converge");
    Eigen::Vector4cd lambda = es.eigenvalues();
    Mat4 vecs = es.eigenvectors();

    // Group numerically equal eigenvalues; replace the solver's vectors inside
    // each group by an orthonormal basis of the null space of Θ - λ̄ I.
    std::array<int, 4> group{0, 1, 2, 3};
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            if (std::abs(lambda(i) - lambda(j)) <= kClusterTol * norm) {
                const int gi = group[i], gj = group[j];
                for (auto& g : group) if (g == gj) g = gi;
            }
        }
    }
    for (int g = 0; g < 4; ++g) {
        std::vector<int> members;
        for (int i = 0; i < 4; ++i) if (group[i] == g) members.push_back(i);
        const int m = int(members.size());
        if (m < 2) continue;
        cplx mean = 0.0;
        for (int i : members) mean += lambda(i);
        mean /= double(m);
        Eigen::JacobiSVD<Mat4> svd(theta - mean * Mat4::Identity(), Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int nullity = 0;
        for (int i = 0; i < 4; ++i) if (sv(i) <= kNullTol * norm) ++nullity;
        if (nullity < m) {
            throw Error(ErrorKind::mode_degeneracy, "Θ is defective: repeated eigenvalue lacks eigenvectors",
                        std::abs(mean));
        }
        for (int k = 0; k < m; ++k) {
            const Vec4 q = svd.matrixV().col(3 - k);
            vecs.col(members[k]) = q;
            lambda(members[k]) = q.dot(theta * q);  // Rayleigh quotient (q is unit)
        }
    }

    std::array<int, 4> order{0, 1, 2, 3};
    const double tie = kMarginalTol * norm;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ra = lambda(a).real(), rb = lambda(b).real();
        if (std::abs(ra - rb) > tie) return ra < rb;
        return lambda(a).imag() < lambda(b).imag();
    });

    for (int j = 0; j < 4; ++j) {
        const int src = order[j];
        out.omega[j] = lambda(src);
        out.vectors.col(j) = normalized(vecs.col(src));
        out.classes[j] = classify(out.omega[j], norm);
    }

    out.condition = condition_number(out.vectors);
    if (!(out.condition <= kMaxCondition))
        throw Error(ErrorKind::mode_degeneracy, "eigenvector matrix is near-singular (Θ near-defective)",
                    out.condition);
    for (int j = 0; j < 4; ++j) {
        const Vec4 r = out.vectors.col(j);
        const double res = (theta * r - out.omega[j] * r).norm();
        if (!(res <= kResidualTol * norm * r.norm()))
            throw Error(ErrorKind::mode_degeneracy, "eigenpair residual above tolerance", res / norm);
    }
    return out;
}

void resolve_marginal(ModeBasis& basis, const Mat4& shifted_theta) {
    if (basis.count(ModeClass::marginal) == 0) return;
    Eigen::ComplexEigenSolver<Mat4> es(shifted_theta, false);
    const Eigen::Vector4cd shifted = es.eigenvalues();
    std::array<bool, 4> used{};
    // Greedy one-to-one matching by distance, nearest pairs first.
    struct Pair { double d; int mode; int target; };
    std::vector<Pair> pairs;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) pairs.push_back({std::abs(basis.omega[j] - shifted(k)), j, k});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    std::array<int, 4> match{-1, -1, -1, -1};
    for (const auto& p : pairs) {
        if (match[p.mode] >= 0 || used[p.target]) continue;
        match[p.mode] = p.target;
        used[p.target] = true;
    }
    for (int j = 0; j < 4; ++j) {
        if (basis.classes[j] != ModeClass::marginal) continue;
        const double re = shifted(match[j]).real();
        if (re == 0.0) throw Error(ErrorKind::mode_degeneracy, "mode stays marginal after the limit shift");
        basis.classes[j] = re > 0.0 ? ModeClass::decays_toward_plus_infinity : ModeClass::decays_toward_minus_infinity;
    }
    // Exactly degenerate modes must land on the same side.
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            if (std::abs(basis.omega[i] - basis.omega[j]) <= kClusterTol * basis.theta_norm &&
                basis.classes[i] != basis.classes[j])
                throw Error(ErrorKind::mode_degeneracy, "degenerate marginal pair splits under the limit shift",
                            std::abs(basis.omega[i]));
        }
    }
}

Mat4 vacuum_theta(const KParallel& kpar, cplx s, const UnitSystem& units) {
    if (s == 0.0) throw Error(ErrorKind::invalid_argument, "vacuum Θ needs s != 0");
    const double kx = kpar.kx, ky = kpar.ky;
    const double e0 = units.eps0, m0 = units.mu0;
    const cplx se = s * e0, sm = s * m0;
    Mat4 t = Mat4::Zero();
    t(0, 2) = -kx * ky / se;
    t(0, 3) = m0 * s + kx * kx / se;
    t(1, 2) = -m0 * s - ky * ky / se;
    t(1, 3) = kx * ky / se;
    t(2, 0) = kx * ky / sm;
    t(2, 1) = -e0 * s - kx * kx / sm;
    t(3, 0) = e0 * s + ky * ky / sm;
    t(3, 1) = -kx * ky / sm;
    return t;
}

ModeBasis vacuum_modes(const KParallel& kpar, cplx s, const UnitSystem& units) {
    const double kx = kpar.kx, ky = kpar.ky;
    const cplx s2em = s * s * units.eps0 * units.mu0;
    const cplx q2 = kx * kx + ky * ky + s2em;
    const double scale = kx * kx + ky * ky + std::norm(s) * units.eps0 * units.mu0;
    if (s == 0.0 || std::abs(q2) <= 1e-14 * scale)
        throw Error(ErrorKind::mode_degeneracy, "vacuum branch point: kx² + ky² + s² ε0 μ0 = 0", std::abs(q2));
    const cplx q = std::sqrt(q2);
    const cplx den = s * units.eps0 * q;
    ModeBasis out;
    out.omega = {-q, -q, q, q};
    Vec4 r1, r2;
    r1 << -(kx * kx + s2em) / den, -(kx * ky) / den, 0.0, 1.0;
    r2 << (kx * ky) / den, (ky * ky + s2em) / den, 1.0, 0.0;
    out.vectors.col(0) = r1;
    out.vectors.col(1) = r2;
    out.vectors.col(2) << -r1(0), -r1(1), 0.0, 1.0;
    out.vectors.col(3) << -r2(0), -r2(1), 1.0, 0.0;
    const Mat4 theta = vacuum_theta(kpar, s, units);
    out.theta_norm = theta.norm();
    for (int j = 0; j < 4; ++j) out.classes[j] = classify(out.omega[j], out.theta_norm);
    out.condition = condition_number(out.vectors);
    return out;
}

Mat4 spectral_projector(const Mat4& vectors, const std::array<bool, 4>& select) {
    Eigen::PartialPivLU<Mat4> lu(vectors);
    const Mat4 inv = lu.inverse();
    Mat4 p = Mat4::Zero();
    for (int j = 0; j < 4; ++j) {
        if (select[j]) p += vectors.col(j) * inv.row(j);
    }
    return p;
}

}  // namespace bianiso::modes
