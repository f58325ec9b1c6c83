// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include "bianiso/em_system.hpp"
#include "bianiso/medium.hpp"
#include "bianiso/mode_solver.hpp"
#include "bianiso/reference_oracles.hpp"
#include "bianiso/stack_solver.hpp"
#include "bianiso/synthesis.hpp"

#include "../unit/test_support.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bianiso;
using namespace test_support;

namespace {

const auto kUnits = UnitSystem::normalized();
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// Entry-wise relative mismatch; exactly-zero reference entries are compared
// against the largest entry instead.
double entrywise_rel(const Mat4& got, const Mat4& ref) {
    const double big = ref.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double d = std::abs(got(i, j) - ref(i, j));
            const double m = std::abs(ref(i, j));
            worst = std::max(worst, m > 0.0 ? d / m : d / std::max(big, 1.0));
        }
    return worst;
}

medium::SusceptibilitySet vacuum() { return {"vacuum", medium::ConstantModel{}}; }

stack::LayerStack slab(cplx n, double d) {
    stack::LayerStack s;
    s.left = vacuum();
    s.right = vacuum();
    s.layers.push_back({d, {"n", medium::ConstantModel::isotropic_index(n)}});
    return s;
}

stack::LayerStack random_stack(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> thick(0.1, 1.0);
    stack::LayerStack st;
    st.left = n % 3 == 0 ? vacuum() : medium::SusceptibilitySet{"left", random_passive(rng)};
    st.right = n % 2 == 0 ? vacuum() : medium::SusceptibilitySet{"right", random_passive(rng)};
    for (int l = 0; l < 1 + n % 3; ++l) st.layers.push_back({thick(rng), {"layer", random_passive(rng)}});
    return st;
}

// --------------------------------------------------------------------------

Outcome vacuum_theta() {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const auto k = random_kpar(rng);
        const cplx s = random_s(rng);
        const auto sys = em::theta_system(medium::EtaSet{}, k, s, Direction::forward, kUnits);
        worst = std::max(worst, entrywise_rel(sys.theta, oracle::printed_vacuum_theta(k, s, kUnits)));
    }
    return {worst <= 1e-14, "max entry-wise relative error " + sci(worst) + " over 1000 samples"};
}

Outcome vacuum_spectrum() {
    std::mt19937_64 rng(1002);
    double ew = 0.0, pw = 0.0;
    for (int n = 0; n < 500; ++n) {
        const auto k = random_kpar(rng);
        const cplx s = random_s(rng);
        const auto sys = em::theta_system(medium::EtaSet{}, k, s, Direction::forward, kUnits);
        const auto b = modes::eigenmodes(sys.theta);
        cplx q = std::sqrt(k.kx * k.kx + k.ky * k.ky + s * s * kUnits.eps0 * kUnits.mu0);
        if (q.real() < 0.0) q = -q;
        for (int j = 0; j < 4; ++j) {
            const cplx expect = j < 2 ? -q : q;
            ew = std::max(ew, std::abs(b.omega[j] - expect) / std::abs(q));
        }
        const auto v = modes::vacuum_modes(k, s, kUnits);
        for (auto sel : {std::array<bool, 4>{true, true, false, false}, std::array<bool, 4>{false, false, true, true}}) {
            const Mat4 p1 = modes::spectral_projector(b.vectors, sel);
            const Mat4 p2 = modes::spectral_projector(v.vectors, sel);
            pw = std::max(pw, (p1 - p2).norm() / p2.norm());
        }
    }
    return {ew <= 1e-10 && pw <= 1e-8,
            "eigenvalue rel error " + sci(ew) + ", projector rel error " + sci(pw) + " over 500 samples"};
}

Outcome susceptibility_checks() {
    std::mt19937_64 rng(1003);
    auto real = [&] {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        RealTensor3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
        return m;
    };
    medium::EnvelopeReservoir r1{0.5, real(), real()};
    medium::EnvelopeReservoir r2{2.0, real(), real()};
    medium::TabulatedReservoir tab;
    const RealTensor3 tf = real(), tg = real();
    for (int i = 0; i <= 200; ++i) {
        const double w = 0.05 * i;
        tab.omega.push_back(w);
        tab.f.push_back(tf / (1.0 + w * w));
        tab.g.push_back(tg / (1.0 + w * w));
    }
    medium::PoleModel pm;
    pm.chi1.push_back({real().cast<cplx>(), 2.0, 0.3});
    pm.chi3.push_back({0.3 * real().cast<cplx>(), 1.5, 0.2});
    pm.chi4.push_back({0.2 * real().cast<cplx>(), 1.0, 0.5});
    medium::ConstantModel km;
    km.chi1 = random_tensor(rng, 1.0);
    km.chi3 = random_tensor(rng, 0.2);
    km.chi4 = random_tensor(rng, 0.2);

    const std::vector<medium::SusceptibilitySet> sets{{"envelope", medium::CouplingModel({r1, r2})},
                                                      {"tabulated", medium::CouplingModel({tab})},
                                                      {"poles", pm},
                                                      {"constant", km}};
    std::vector<LaplacePoint> points;
    for (int i = 0; i < 5; ++i) points.push_back(LaplacePoint::regular(random_s(rng)));
    for (double w : {0.7, 2.3})
        for (Direction d : {Direction::forward, Direction::backward}) points.push_back(LaplacePoint::harmonic(w, d));
    double sym = 0.0;
    for (const auto& set : sets) {
        for (const auto& p : points) {
            const auto c = set.laplace(p);
            sym = std::max(sym, (c.chi2 - c.chi3.transpose()).norm());
        }
        if (std::holds_alternative<medium::ConstantModel>(set.model)) continue;
        for (double t : {0.1, 1.0, 4.0}) {
            const auto c = set.time(t);
            sym = std::max(sym, (c.chi2 - c.chi3.transpose()).norm());
        }
    }

    // Scalar family: f = sqrt(w) x̂, g = 0.
    double fam = 0.0;
    for (double a : {0.5, 2.0}) {
        medium::EnvelopeReservoir r;
        r.width = a;
        r.f(0, 0) = 1.0;
        const medium::CouplingModel model({r});
        for (int i = 0; i < 50; ++i) {
            const double t = 0.02 * std::pow(1000.0, i / 49.0);  // 0.02 .. 20
            const double exact_t = (1.0 - std::exp(-a * t)) / a;
            fam = std::max(fam, std::abs(medium::susceptibility_time(model, t).chi1(0, 0) - exact_t) / exact_t);
            const cplx s(0.1 * std::pow(50.0, i / 49.0), -5.0 + 10.0 * i / 49.0);
            const cplx exact_s = 1.0 / (s * (s + a));
            const cplx got = medium::susceptibility_laplace(model, LaplacePoint::regular(s)).chi1(0, 0);
            fam = std::max(fam, std::abs(got - exact_s) / std::abs(exact_s));
        }
    }
    return {sym < 1e-12 && fam <= 1e-6,
            "max ||chi2 - chi3^T||_F " + sci(sym) + " over 4 models; scalar family rel error " + sci(fam)};
}

Outcome elimination_equivalence() {
    std::mt19937_64 rng(1004);
    double coeff = 0.0, theta_other = 0.0, theta44 = 0.0, theta44_flipped = 0.0, source = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const auto eta = random_eta(rng);
        const auto k = random_kpar(rng);
        const cplx s = random_s(rng);
        const auto sys = em::theta_system(eta, k, s, Direction::forward, kUnits);
        const auto p = oracle::printed_elimination_coeffs(sys.blocks.k);
        const auto& c = sys.coeffs;
        const cplx got[8] = {c.alpha1, c.beta1, c.gamma1, c.delta1, c.alpha2, c.beta2, c.gamma2, c.delta2};
        const cplx ref[8] = {p.alpha1, p.beta1, p.gamma1, p.delta1, p.alpha2, p.beta2, p.gamma2, p.delta2};
        for (int i = 0; i < 8; ++i) coeff = std::max(coeff, std::abs(got[i] - ref[i]) / (1.0 + std::abs(ref[i])));

        const Mat4 pt = oracle::printed_theta(sys.blocks.k, eta, s, kUnits.mu0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double d = std::abs(sys.theta(i, j) - pt(i, j)) / (1.0 + std::abs(pt(i, j)));
                (i == 3 && j == 3 ? theta44 : theta_other) = std::max(i == 3 && j == 3 ? theta44 : theta_other, d);
            }
        // The (4,4) entry with the sign of its η2_12 term reversed.
        const cplx flipped = pt(3, 3) + 2.0 * s * eta.eta2(0, 1);
        theta44_flipped = std::max(theta44_flipped, std::abs(sys.theta(3, 3) - flipped) / (1.0 + std::abs(flipped)));

        const Vec6 j = random_vec6(rng);
        const Vec4 g = em::reduce_source(sys, j), gp = oracle::printed_source(sys.blocks.k, j);
        source = std::max(source, (g - gp).norm() / (1.0 + gp.norm()));
    }

    // Coupled constitutive relations with the re-derived η, and the report for
    // a medium with χ3 != χ4.
    double resid = 0.0;
    medium::EliminationComparison report;
    for (int n = 0; n < 200; ++n) {
        medium::ChiSlice chi;
        chi.chi1 = random_tensor(rng, 1.0);
        chi.chi3 = random_tensor(rng, 0.3);
        chi.chi4 = random_tensor(rng, 0.3);
        chi.chi2 = chi.chi3.transpose();
        medium::NoiseSources raw{random_vec6(rng).head<3>(), random_vec6(rng).tail<3>()};
        const Vec3 e = random_vec6(rng).head<3>(), h = random_vec6(rng).tail<3>();
        const auto eta = medium::eliminate_magnetization(chi, kUnits.mu0);
        const auto primed = medium::transform_noise_sources(chi, raw, kUnits.mu0);
        resid = std::max(resid, medium::constitutive_residual(chi, raw, eta, primed, e, h, kUnits.mu0));
        if (n == 0) report = medium::compare_conventions(chi, kUnits.mu0, raw, e, h);
    }
    std::cout << "  elimination report (chi3 != chi4): max|derived - printed| eta1 " << sci(report.max_difference[0])
              << ", eta2 " << sci(report.max_difference[1]) << ", eta3 " << sci(report.max_difference[2])
              << ", eta4 " << sci(report.max_difference[3]) << "; constitutive residual derived "
              << sci(report.rederived_residual) << ", printed " << sci(report.printed_residual) << '\n';
    std::cout << "  theta(4,4): printed entry off by up to " << sci(theta44)
              << "; with the sign of its eta2_12 term reversed the mismatch is " << sci(theta44_flipped) << '\n';
    const bool report_ok = std::isfinite(report.printed_residual) && report.rederived_residual <= 1e-12;
    const bool pass = coeff <= 1e-12 && theta_other <= 1e-12 && theta44 <= 1e-12 && source <= 1e-12 &&
                      resid <= 1e-12 && report_ok;
    return {pass, "coefficients " + sci(coeff) + ", theta entries except (4,4) " + sci(theta_other) +
                      ", theta(4,4) " + sci(theta44) + ", source " + sci(source) + ", P/M residual " + sci(resid)};
}

// Shared frequency/angle sweep of the slab checks.
template <class F>
void slab_sweep(cplx n, double d, F&& f) {
    for (int iw = 0; iw < 50; ++iw) {
        const double w = 0.2 + 9.8 * iw / 49.0;
        for (int ia = 0; ia < 10; ++ia) {
            const double th = (80.0 * ia / 9.0) * kPi / 180.0;
            const double phi = 0.3 * ia;
            const KParallel k{w * std::sin(th) * std::cos(phi), w * std::sin(th) * std::sin(phi)};
            f(w, th, stack::scattering_matrices(slab(n, d), k, w, kUnits));
        }
    }
}

constexpr double kSlabThickness = 0.37;

Outcome fresnel_airy() {
    double worst = 0.0;
    for (cplx n : {cplx(1.5, 0.0), cplx(2.0, 0.0), cplx(2.0, 0.1)}) {
        slab_sweep(n, kSlabThickness, [&](double w, double th, const stack::ScatterResult& r) {
            const auto os = oracle::fresnel_airy(n, kSlabThickness, w, th, oracle::Polarization::s, kUnits);
            const auto op = oracle::fresnel_airy(n, kSlabThickness, w, th, oracle::Polarization::p, kUnits);
            worst = std::max({worst, std::abs(r.r(0, 0) - os.r), std::abs(r.t(0, 0) - os.t),
                              std::abs(r.r(1, 1) - op.r), std::abs(r.t(1, 1) - op.t)});
        });
    }
    const double w = 2.0 * kPi;  // vacuum wavelength 1
    const auto q = stack::scattering_matrices(slab(2.0, 1.0 / 8.0), {}, w, kUnits);
    const auto h = stack::scattering_matrices(slab(2.0, 1.0 / 4.0), {}, w, kUnits);
    const double qerr = std::max(std::abs(q.reflectance[0] - 0.36), std::abs(q.reflectance[1] - 0.36));
    const double herr = std::max(h.reflectance[0], h.reflectance[1]);
    return {worst <= 1e-8 && qerr <= 1e-10 && herr <= 1e-10,
            "max |solver - Fresnel-Airy| " + sci(worst) + " over 3000 cases; quarter-wave |R^2 - 0.36| " + sci(qerr) +
                ", half-wave R " + sci(herr)};
}

Outcome ode_oracle() {
    std::mt19937_64 rng(1006);
    double ode = 0.0, res = 0.0;
    int layers = 0, skipped = 0;
    for (int n = 0; n < 12; ++n) {
        const auto st = random_stack(rng, n);
        const auto k = random_kpar(rng, 1.0);
        const auto point = LaplacePoint::regular(random_s(rng));
        const Direction dir = n % 2 ? Direction::forward : Direction::backward;
        stack::IncidentData inc;
        inc.left = random_vec4(rng);
        inc.right = random_vec4(rng);
        // Half the stacks carry a smooth distributed source in their layers.
        const Vec6 j0 = random_vec6(rng);
        const bool driven = n % 2 == 0;
        auto jfun = [&](double z) -> Vec6 { return j0 * std::cos(2.0 * z); };
        std::vector<em::ThetaSystem> sys;
        for (int r = 0; r < st.region_count(); ++r)
            sys.push_back(em::theta_system(medium::eliminate_magnetization(st.region_medium(r).laplace(point), kUnits.mu0),
                                           k, point.s, dir, kUnits));
        std::vector<stack::RegionDrive> drives(std::size_t(st.region_count()));
        if (driven)
            for (int r = 1; r + 1 < st.region_count(); ++r) {
                const em::ThetaSystem* ts = &sys[std::size_t(r)];
                drives[std::size_t(r)].g = [ts, jfun](double z) { return em::reduce_source(*ts, jfun(z)); };
            }
        const auto sol = stack::match_slab(st, k, point, dir, kUnits, drives, inc);
        for (int r = 1; r + 1 < st.region_count(); ++r) {
            const auto& reg = sol.regions[std::size_t(r)];
            double om = 0.0;
            for (const cplx& o : reg.basis.omega) om = std::max(om, std::abs(o));
            if (om * (reg.z_hi - reg.z_lo) > 5.0) {
                ++skipped;
                continue;
            }
            ++layers;
            std::function<Vec4(double)> g;
            if (driven) g = drives[std::size_t(r)].g;
            const Vec4 direct =
                oracle::integrate_layer(reg.system.theta, g, sol.lambda(reg.z_lo, r), reg.z_lo, reg.z_hi, dir, 1e-12);
            const Vec4 modal = sol.lambda(reg.z_hi, r);
            ode = std::max(ode, (direct - modal).norm() / modal.norm());

            std::vector<double> z;
            std::vector<Vec6> fields, sources;
            const int m = 801;
            for (int i = 0; i < m; ++i) {
                const double zz = reg.z_lo + (reg.z_hi - reg.z_lo) * i / (m - 1);
                const Vec6 j = driven ? jfun(zz) : Vec6::Zero();
                const Vec4 lam = sol.lambda(zz, r);
                const em::Vec2 lz = sol.longitudinal(zz, r, j);
                Vec6 f;
                f << lam(0), lam(1), lz(0), lam(2), lam(3), lz(1);
                z.push_back(zz);
                fields.push_back(f);
                sources.push_back(j);
            }
            const auto eta = medium::eliminate_magnetization(st.region_medium(r).laplace(point), kUnits.mu0);
            res = std::max(res, oracle::residual_full_system(z, fields, eta, k, point.s, dir, kUnits, sources));
        }
    }
    return {layers > 0 && ode <= 1e-6 && res < 1e-8,
            "ODE rel error " + sci(ode) + ", 6x6 residual " + sci(res) + " over " + std::to_string(layers) +
                " layers (" + std::to_string(skipped) + " with |Omega d| > 5 skipped)"};
}

Outcome continuity_and_decay() {
    std::mt19937_64 rng(1007);
    double jump = 0.0;
    int bad_decay = 0;
    for (int n = 0; n < 100; ++n) {
        const auto st = random_stack(rng, n);
        const auto k = random_kpar(rng, 1.0);
        // Mostly regular points, some on the frequency axis.
        const bool on_axis = n % 4 == 3;
        const cplx s = random_s(rng);
        stack::IncidentData inc;
        inc.left = random_vec4(rng);
        inc.right = random_vec4(rng);
        const Direction d = n % 2 ? Direction::forward : Direction::backward;
        const auto p = on_axis ? LaplacePoint::harmonic(0.5 + 0.05 * n, d) : LaplacePoint::regular(s);
        const auto sol = stack::match_slab(st, k, p, d, kUnits, {}, inc);
        jump = std::max(jump, sol.max_interface_jump());
        if (!sol.decay_conditions_hold()) ++bad_decay;
        // Independent check of the classification at a regular point: modes
        // kept in the left half-space grow toward +z, those in the right
        // decay. On-axis points are compared with a point just off the axis.
        const auto& l = sol.regions.front();
        const auto& r = sol.regions.back();
        stack::RegionSystem lref = l, rref = r;
        if (p.on_axis()) {
            const auto off = LaplacePoint::regular(p.s + 1e-6);
            lref = stack::prepare_region(st.left, k, off, d, kUnits, -kInf, 0.0);
            rref = stack::prepare_region(st.right, k, off, d, kUnits, sol.interfaces.back(), kInf);
        }
        auto nearest = [](const stack::RegionSystem& a, int j, const stack::RegionSystem& b) {
            int best = 0;
            for (int i = 1; i < 4; ++i)
                if (std::abs(b.kappa(i) - a.kappa(j)) < std::abs(b.kappa(best) - a.kappa(j))) best = i;
            return b.kappa(best);
        };
        for (int j = 0; j < 4; ++j) {
            if (sol.coeffs.front()(j) != 0.0 && !(nearest(l, j, lref).real() > 0.0)) ++bad_decay;
            if (sol.coeffs.back()(j) != 0.0 && !(nearest(r, j, rref).real() < 0.0)) ++bad_decay;
        }
    }
    return {jump < 1e-10 && bad_decay == 0,
            "max tangential jump " + sci(jump) + ", decay violations " + std::to_string(bad_decay) + " in 100 stacks"};
}

Outcome energy() {
    double worst = 0.0;
    for (cplx n : {cplx(1.5, 0.0), cplx(2.0, 0.0)}) {
        slab_sweep(n, kSlabThickness, [&](double, double, const stack::ScatterResult& r) {
            for (int p = 0; p < 2; ++p) worst = std::max(worst, std::abs(r.reflectance[p] + r.transmittance[p] - 1.0));
        });
    }
    return {worst <= 1e-8, "max |R + T - 1| " + sci(worst) + " over the lossless part of the slab sweep"};
}

Outcome time_reconstruction() {
    auto g = [](double z) { return std::exp(-0.5 * z * z); };
    stack::LayerStack st;
    st.left = vacuum();
    st.right = vacuum();
    st.layers.push_back({1.0, vacuum()});
    const double z0 = 3.0;
    const auto w = synthesis::symmetric_grid(2.0 * kPi / 64.0, 256);
    std::vector<Vec6> f, b;
    for (double om : w) {
        for (Direction d : {Direction::forward, Direction::backward}) {
            const auto p = LaplacePoint::harmonic(om, d);
            synthesis::BlockSource j = [&, d, p](double z) {
                const Vec3 e0(g(z), 0.0, 0.0), h0(0.0, g(z), 0.0);
                return em::source_vector({}, h0, e0, p.s, d, kUnits);
            };
            const auto fr = synthesis::driven_profile(st, {}, p, d, kUnits, j, {z0});
            Vec6 v;
            v << fr.e[0], fr.h[0];
            (d == Direction::forward ? f : b).push_back(v);
        }
    }
    const double dt = 0.05;
    std::vector<double> times;
    for (int i = 0; i <= 240; ++i) times.push_back(-3.0 + dt * i);
    const auto out = synthesis::time_reconstruct(w, f, b, {}, Eigen::Vector2d::Zero(), times);
    std::size_t peak = 0;
    double num = 0.0, den = 0.0, imag = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (out.e[i](0).real() > out.e[peak](0).real()) peak = i;
        const double ref = g(z0 - times[i]);
        num += std::norm(out.e[i](0) - ref) + std::norm(out.h[i](1) - ref);
        den += 2.0 * ref * ref;
        imag = std::max({imag, out.e[i].imag().norm(), out.h[i].imag().norm()});
    }
    const double delay = times[peak], shape = std::sqrt(num / den);

    // Arbitrary conjugate-symmetric spectra.
    std::mt19937_64 rng(1009);
    const auto w2 = synthesis::symmetric_grid(0.25, 64);
    std::vector<Vec6> f2(w2.size()), b2(w2.size());
    for (std::size_t k = 0; k < w2.size() / 2; ++k) {
        const Vec6 v = random_vec6(rng) * std::exp(-0.5 * w2[k] * w2[k]);
        const Vec6 u = random_vec6(rng) * std::exp(-0.5 * w2[k] * w2[k]);
        f2[k] = v;
        f2[w2.size() - 1 - k] = v.conjugate();
        b2[k] = u;
        b2[w2.size() - 1 - k] = u.conjugate();
    }
    const auto out2 = synthesis::time_reconstruct(w2, f2, b2, {}, Eigen::Vector2d::Zero(), {-4.0, -1.0, 0.0, 2.5, 7.0});
    double imag2 = 0.0;
    for (std::size_t i = 0; i < out2.axis.size(); ++i)
        imag2 = std::max({imag2, out2.e[i].imag().norm(), out2.h[i].imag().norm()});
    const bool pass = std::abs(delay - z0) <= dt && shape < 1e-4 && imag <= 1e-8 && imag2 <= 1e-8;
    return {pass, "peak at t = " + std::to_string(delay) + " (expected " + std::to_string(z0) + ", step " +
                      std::to_string(dt) + "), L2 shape error " + sci(shape) + ", imaginary part " +
                      sci(std::max(imag, imag2))};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct CliSetup {
    std::string cli;
    std::string configs;
    std::string workdir;
};

Outcome cli_reproducibility(const CliSetup& setup) {
    const std::vector<std::string> names{"scattering", "initial_value", "time_reconstruction"};
    const fs::path work(setup.workdir);
    fs::remove_all(work);
    fs::create_directories(work);
    auto run_all = [&](const std::string& tag, int threads) -> std::string {
        for (const auto& name : names) {
            const fs::path out = work / tag / name;
            const std::string cmd = "\"" + setup.cli + "\" --config \"" +
                                    (fs::path(setup.configs) / (name + ".yaml")).string() + "\" --output \"" +
                                    out.string() + "\" --threads " + std::to_string(threads) + " 2> \"" +
                                    (work / (tag + "_" + name + ".log")).string() + "\"";
            if (std::system(cmd.c_str()) != 0) return name + " failed in run " + tag;
        }
        return {};
    };
    for (auto [tag, threads] : {std::pair{"serial_a", 1}, std::pair{"serial_b", 1}, std::pair{"threads_8", 8}}) {
        const std::string err = run_all(tag, threads);
        if (!err.empty()) return {false, err};
    }
    int files = 0, differ = 0;
    for (const auto& entry : fs::recursive_directory_iterator(work / "serial_a")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), work / "serial_a");
        const std::string a = slurp(entry.path());
        ++files;
        for (const char* other : {"serial_b", "threads_8"}) {
            const fs::path p = work / other / rel;
            if (!fs::exists(p) || slurp(p) != a) {
                ++differ;
                std::cout << "  differs: " << (fs::path(other) / rel).string() << '\n';
            }
        }
    }
    return {files == 6 && differ == 0, std::to_string(files) + " output files, " + std::to_string(differ) +
                                           " mismatches across two serial runs and --threads 8"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    CliSetup setup;
    app.add_option("--cli", setup.cli, "Path to the bianiso executable")->required();
    app.add_option("--configs", setup.configs, "Directory with the sample configs")->required();
    app.add_option("--workdir", setup.workdir, "Scratch directory for CLI outputs")->required();
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds; 0 = none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "vacuum theta", 1.0, vacuum_theta},
        {2, "vacuum spectrum", 1.0, vacuum_spectrum},
        {3, "susceptibility symmetry and transforms", 5.0, susceptibility_checks},
        {4, "elimination equivalence", 2.0, elimination_equivalence},
        {5, "Fresnel-Airy agreement", 10.0, fresnel_airy},
        {6, "ODE oracle and 6x6 residual", 10.0, ode_oracle},
        {7, "interface continuity and decay", 10.0, continuity_and_decay},
        {8, "energy conservation", 0.0, energy},
        {9, "time reconstruction", 30.0, time_reconstruction},
        {10, "CLI reproducibility", 0.0, [&] { return cli_reproducibility(setup); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget > 0.0 && secs > c.budget) {
            o.pass = false;
            o.detail += "; over the " + std::to_string(c.budget) + " s budget";
        }
        char head[96];
        std::snprintf(head, sizeof head, "%s criterion %d (%s) [%.2f s]: ", o.pass ? "PASS" : "FAIL", c.id, c.name,
                      secs);
        std::cout << head << o.detail << std::endl;
        if (!o.pass) ++failures;
    }
    return failures;
}
