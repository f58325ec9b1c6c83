#include "bianiso/synthesis.hpp"

#include "bianiso/errors.hpp"
#include "bianiso/mode_solver.hpp"

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <numbers>

namespace bianiso::synthesis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEdgeTol = 1e-8;
constexpr double kHalfStepTol = 1e-8;

double grid_step(const std::vector<double>& g, const char* what) {
    if (g.size() < 2) throw Error(ErrorKind::invalid_argument, std::string(what) + " grid needs at least two points");
    const double h = (g.back() - g.front()) / double(g.size() - 1);
    if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, std::string(what) + " grid must increase");
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (std::abs(g[i] - g[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw Error(ErrorKind::invalid_argument, std::string(what) + " grid must be uniform", g[i]);
    }
    return h;
}

// Integrands of D̲ and B̲ at one kz sample, without the e^{±ikz z} factor.
InitialSpectra sample_spectra(const FreeSpaceAmplitudes& amps, std::size_t i, Direction dir, const UnitSystem& units) {
    const double sg = sign_of(dir);
    const Eigen::Vector3d k(amps.kpar.kx, amps.kpar.ky, amps.kz[i]);
    const double kn = k.norm();
    const auto& a_upper = sg > 0 ? amps.plus[i] : amps.minus[i];   // a_{±k}
    const auto& a_lower = sg > 0 ? amps.minus[i] : amps.plus[i];   // a_{∓k}
    InitialSpectra out;
    if (kn == 0.0) {
        for (int l = 0; l < 2; ++l) {
            if (a_upper[l] != 0.0 || a_lower[l] != 0.0)
                throw Error(ErrorKind::invalid_argument, "amplitude at k = 0 has no defined frequency");
        }
        return out;
    }
    const double omega = units.c() * kn;
    const auto e_upper = polarization_basis(sg * k);
    const auto e_lower = polarization_basis(-sg * k);
    const double cd = std::sqrt(omega / (4.0 * kPi));
    const double cb = std::sqrt(1.0 / (4.0 * kPi * omega));
    for (int l = 0; l < 2; ++l) {
        const Vec3 eu = e_upper[l].cast<cplx>();
        const Vec3 el = e_lower[l].cast<cplx>();
        out.d += -kI * cd * (std::conj(a_lower[l]) * el - std::conj(a_upper[l]) * eu);
        const Vec3 ku = (sg * kI) * k.cross(e_upper[l]).cast<cplx>();
        const Vec3 kl = (sg * kI) * k.cross(e_lower[l]).cast<cplx>();
        out.b += cb * (ku * a_upper[l] + kl * std::conj(a_lower[l]));
    }
    return out;
}

void check_edges(const FreeSpaceAmplitudes& amps) {
    double peak = 0.0;
    auto mag = [&](std::size_t i) {
        double m = 0.0;
        for (int l = 0; l < 2; ++l) m = std::max({m, std::abs(amps.plus[i][l]), std::abs(amps.minus[i][l])});
        return m;
    };
    for (std::size_t i = 0; i < amps.kz.size(); ++i) peak = std::max(peak, mag(i));
    if (peak == 0.0) return;
    const double edge = std::max(mag(0), mag(amps.kz.size() - 1));
    if (edge > kEdgeTol * peak)
        throw Error(ErrorKind::resolution, "mode amplitudes do not vanish at the kz grid edges", edge / peak);
}

Vec4 q_from(const InitialSpectra& sp, const KParallel& kp, cplx s, Direction dir, const UnitSystem& units) {
    const double sg = sign_of(dir);
    const cplx ie = kI / (s * units.eps0);
    const cplx im = kI / (s * units.mu0);
    Vec4 q;
    q(0) = sg * (sp.b(1) + ie * kp.kx * sp.d(2));
    q(1) = sg * (-sp.b(0) + ie * kp.ky * sp.d(2));
    q(2) = sg * (-sp.d(1) + im * kp.kx * sp.b(2));
    q(3) = sg * (sp.d(0) + im * kp.ky * sp.b(2));
    return q;
}

// Trapezoid sum of f(i) with an error estimate from every other sample.
template <class F>
auto trapezoid(std::size_t n, double h, F&& f) {
    using V = decltype(f(std::size_t{0}));
    V full = V::Zero(), half = V::Zero();
    double scale = 0.0;
    const std::size_t last_even = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    for (std::size_t i = 0; i < n; ++i) {
        const V v = f(i);
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        full += w * h * v;
        scale += h * v.cwiseAbs().maxCoeff();
        if (i % 2 == 0 && i <= last_even) {
            const double w2 = (i == 0 || i == last_even) ? 0.5 : 1.0;
            half += w2 * 2.0 * h * v;
        }
    }
    if (n >= 5) {
        const double diff = (full - half).cwiseAbs().maxCoeff();
        if (diff > kHalfStepTol * std::max(scale, 1e-300) && diff > 1e-14)
            throw Error(ErrorKind::resolution, "kz grid too coarse for the requested z", diff);
    }
    return full;
}

}  // namespace

std::array<Eigen::Vector3d, 3> polarization_basis(const Eigen::Vector3d& k) {
    const double n = k.norm();
    if (n == 0.0) throw Error(ErrorKind::invalid_argument, "polarization basis needs k != 0");
    const Eigen::Vector3d kh = k / n;
    Eigen::Vector3d e1 = Eigen::Vector3d::UnitZ().cross(kh);
    if (e1.norm() < 1e-14) {
        e1 = Eigen::Vector3d::UnitX();
    } else {
        e1.normalize();
    }
    const Eigen::Vector3d e2 = kh.cross(e1);
    return {e1, e2, kh};
}

void FreeSpaceAmplitudes::validate() const {
    grid_step(kz, "kz");
    if (plus.size() != kz.size() || minus.size() != kz.size())
        throw Error(ErrorKind::invalid_argument, "amplitude arrays must match the kz grid");
}

InitialSpectra initial_spectra(const FreeSpaceAmplitudes& amps, double z, Direction dir, const UnitSystem& units) {
    amps.validate();
    check_edges(amps);
    const double h = grid_step(amps.kz, "kz");
    const double sg = sign_of(dir);
    const Vec6 v = trapezoid(amps.kz.size(), h, [&](std::size_t i) {
        const InitialSpectra sp = sample_spectra(amps, i, dir, units);
        const cplx ph = std::exp(sg * kI * amps.kz[i] * z);
        Vec6 out;
        out << sp.d * ph, sp.b * ph;
        return out;
    });
    InitialSpectra out;
    out.d = v.head<3>();
    out.b = v.tail<3>();
    return out;
}

Vec4 q_vector(const FreeSpaceAmplitudes& amps, std::size_t i, cplx s, Direction dir, const UnitSystem& units) {
    amps.validate();
    if (i >= amps.kz.size()) throw Error(ErrorKind::range, "kz index out of range", double(i));
    return q_from(sample_spectra(amps, i, dir, units), amps.kpar, s, dir, units);
}

Vec4 free_space_drive(const FreeSpaceAmplitudes& amps, cplx s, double z, Direction dir, const UnitSystem& units) {
    amps.validate();
    check_edges(amps);
    const double h = grid_step(amps.kz, "kz");
    const double sg = sign_of(dir);
    return trapezoid(amps.kz.size(), h, [&](std::size_t i) -> Vec4 {
        return q_from(sample_spectra(amps, i, dir, units), amps.kpar, s, dir, units) *
               std::exp(sg * kI * amps.kz[i] * z);
    });
}

Vec4 free_space_particular(const FreeSpaceAmplitudes& amps, cplx s, double z, Direction dir,
                           const UnitSystem& units) {
    amps.validate();
    check_edges(amps);
    if (!(s.real() > 0.0))
        throw Error(ErrorKind::invalid_argument, "free-space particular solution needs Re s > 0", s.real());
    const double h = grid_step(amps.kz, "kz");
    const double sg = sign_of(dir);
    const Mat4 theta0 = modes::vacuum_theta(amps.kpar, s, units);
    return trapezoid(amps.kz.size(), h, [&](std::size_t i) -> Vec4 {
        const Vec4 q = q_from(sample_spectra(amps, i, dir, units), amps.kpar, s, dir, units);
        const Mat4 m = sg * (kI * amps.kz[i] * Mat4::Identity() + theta0);
        return Eigen::PartialPivLU<Mat4>(m).solve(q) * std::exp(sg * kI * amps.kz[i] * z);
    });
}

FieldFrame field_profile(const stack::StackSolution& solution, const std::vector<double>& zgrid,
                         const std::function<Vec6(double)>& sources) {
    FieldFrame out;
    out.dir = solution.dir;
    for (std::size_t i = 0; i < zgrid.size(); ++i) {
        const double z = zgrid[i];
        if (!std::isfinite(z)) throw Error(ErrorKind::range, "z outside the stack", z);
        if (i > 0 && !(z >= zgrid[i - 1])) throw Error(ErrorKind::invalid_argument, "z grid must be monotone", z);
        const int r = solution.region_of(z);
        const Vec4 l = solution.lambda(z, r);
        const Vec6 j = sources ? sources(z) : Vec6::Zero();
        const em::Vec2 zh = em::recover_longitudinal(solution.regions[std::size_t(r)].system, l, j);
        out.axis.push_back(z);
        out.e.emplace_back(l(0), l(1), zh(0));
        out.h.emplace_back(l(2), l(3), zh(1));
    }
    return out;
}

FieldFrame driven_profile(const stack::LayerStack& stack, const KParallel& kpar, const LaplacePoint& point,
                          Direction dir, const UnitSystem& units, const BlockSource& j,
                          const std::vector<double>& zgrid) {
    if (!j) throw Error(ErrorKind::invalid_argument, "driven profile needs a source");
    stack.validate();
    std::vector<stack::RegionDrive> drives;
    for (int r = 0; r < stack.region_count(); ++r) {
        const medium::EtaSet eta = medium::eliminate_magnetization(stack.region_medium(r).laplace(point), units.mu0);
        auto sys = std::make_shared<em::ThetaSystem>(em::theta_system(eta, kpar, point.s, dir, units));
        drives.push_back({[sys, j](double z) { return em::reduce_source(*sys, j(z)); }});
    }
    const auto sol = stack::match_slab(stack, kpar, point, dir, units, drives);
    return field_profile(sol, zgrid, j);
}

std::vector<double> symmetric_grid(double d_omega, int count) {
    if (!(d_omega > 0.0) || count < 1) throw Error(ErrorKind::invalid_argument, "frequency grid needs Δω > 0, N >= 1");
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) g[std::size_t(k)] = (k - 0.5 * (count - 1)) * d_omega;
    return g;
}

FieldFrame time_reconstruct(const std::vector<double>& omegas, const std::vector<Vec6>& forward,
                            const std::vector<Vec6>& backward, const KParallel& kpar,
                            const Eigen::Vector2d& rpar, const std::vector<double>& times,
                            const TimeOptions& options) {
    const std::size_t n = omegas.size();
    if (forward.size() != n || backward.size() != n)
        throw Error(ErrorKind::invalid_argument, "spectra must match the frequency grid");
    FieldFrame out;
    out.both_directions = true;
    if (n == 0) return out;
    double dw = 0.0;
    if (n > 1) {
        dw = grid_step(omegas, "frequency");
        for (std::size_t k = 0; k < n; ++k) {
            if (std::abs(omegas[k] + omegas[n - 1 - k]) > 1e-9 * dw)
                throw Error(ErrorKind::invalid_argument, "frequency grid must be symmetric about 0", omegas[k]);
        }
    }
    const double phase = kpar.kx * rpar(0) + kpar.ky * rpar(1);
    const cplx ef = std::exp(kI * phase), eb = std::exp(-kI * phase);
    std::vector<Vec6> combined(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        combined[k] = forward[k] * ef + backward[k] * eb;
        peak = std::max(peak, combined[k].norm());
    }
    if (n > 1) {
        const double edge = std::max(combined.front().norm(), combined.back().norm());
        if (peak > 0.0 && edge > options.edge_tolerance * peak)
            throw Error(ErrorKind::resolution, "spectrum not resolved: edge/peak above tolerance", edge / peak);
    }
    const double edge_omega = n > 1 ? std::abs(omegas.back()) + dw : 1.0;
    for (double t : times) {
        if (n > 1 && std::abs(t) > kPi / dw)
            throw Error(ErrorKind::resolution, "time outside the alias-free window ±π/Δω", t);
        Vec6 acc = Vec6::Zero();
        for (std::size_t k = 0; k < n; ++k) {
            double w = n > 1 ? ((k == 0 || k == n - 1) ? 0.5 * dw : dw) : 2.0 * kPi;
            if (options.raised_cosine) w *= 0.5 * (1.0 + std::cos(kPi * omegas[k] / edge_omega));
            acc += w * std::exp(-kI * omegas[k] * t) * combined[k];
        }
        acc /= 2.0 * kPi;
        out.axis.push_back(t);
        out.e.push_back(acc.head<3>());
        out.h.push_back(acc.tail<3>());
    }
    return out;
}

}  // namespace bianiso::synthesis
