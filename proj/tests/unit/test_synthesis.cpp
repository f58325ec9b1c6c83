#include "bianiso/em_system.hpp"
#include "bianiso/mode_solver.hpp"
#include "bianiso/synthesis.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace bianiso;
using namespace test_support;
using namespace bianiso::synthesis;

namespace {

const auto kUnits = UnitSystem::normalized();

// Gaussian wave packet in kz around kc, one polarization on each of ±k.
FreeSpaceAmplitudes packet(KParallel kp, double kc, double width, int n = 401) {
    FreeSpaceAmplitudes a;
    a.kpar = kp;
    for (int i = 0; i < n; ++i) {
        const double kz = kc - 12.0 * width + 24.0 * width * i / (n - 1);
        const double env = std::exp(-0.5 * std::pow((kz - kc) / width, 2));
        a.kz.push_back(kz);
        a.plus.push_back({cplx(env, 0.0), cplx(0.0, 0.5 * env)});
        a.minus.push_back({cplx(0.3 * env, 0.0), cplx(0.0, 0.0)});
    }
    return a;
}

}  // namespace

TEST_CASE("polarization basis is a right-handed orthonormal triad") {
    for (const Eigen::Vector3d& k : {Eigen::Vector3d(0, 0, 2), Eigen::Vector3d(1, -2, 0.5), Eigen::Vector3d(0, 0, -1)}) {
        const auto e = polarization_basis(k);
        CHECK(std::abs(e[0].dot(e[1])) < 1e-15);
        CHECK(std::abs(e[0].dot(e[2])) < 1e-15);
        CHECK((e[0].cross(e[1]) - e[2]).norm() < 1e-15);
        CHECK((e[2] - k.normalized()).norm() < 1e-15);
    }
}

TEST_CASE("symmetric frequency grid") {
    const auto g = symmetric_grid(0.5, 6);
    REQUIRE(g.size() == 6);
    CHECK(g.front() == -1.25);
    CHECK(g.back() == 1.25);
    for (double w : g) CHECK(w != 0.0);
    CHECK(symmetric_grid(1.0, 5)[2] == 0.0);
}

TEST_CASE("initial fields are transverse") {
    const auto a = packet({0.4, -0.3}, 2.0, 0.5);
    for (Direction d : {Direction::forward, Direction::backward}) {
        const double sg = sign_of(d), h = 1e-3, z = 0.7;
        const auto c = initial_spectra(a, z, d, kUnits);
        const auto p = initial_spectra(a, z + h, d, kUnits);
        const auto m = initial_spectra(a, z - h, d, kUnits);
        const cplx dd = sg * kI * (a.kpar.kx * c.d(0) + a.kpar.ky * c.d(1)) + (p.d(2) - m.d(2)) / (2 * h);
        const cplx db = sg * kI * (a.kpar.kx * c.b(0) + a.kpar.ky * c.b(1)) + (p.b(2) - m.b(2)) / (2 * h);
        CHECK(std::abs(dd) < 1e-6 * c.d.norm());
        CHECK(std::abs(db) < 1e-6 * c.b.norm());
    }
}

TEST_CASE("free-space drive is the reduced vacuum source of the initial fields") {
    const auto a = packet({0.2, 0.1}, 1.5, 0.4);
    const cplx s(0.7, -1.2);
    for (Direction d : {Direction::forward, Direction::backward}) {
        const auto sp = initial_spectra(a, 0.3, d, kUnits);
        const auto sys = em::theta_system(medium::EtaSet{}, a.kpar, s, d, kUnits);
        const Vec4 expect = em::reduce_source(sys, em::source_vector({}, sp.b, sp.d, s, d, kUnits));
        CHECK((free_space_drive(a, s, 0.3, d, kUnits) - expect).norm() < 1e-12 * expect.norm());
    }
}

TEST_CASE("free-space particular solution solves the driven vacuum equation") {
    const auto a = packet({0.2, 0.0}, 1.0, 0.3);
    const cplx s(0.9, 0.4);
    const Mat4 theta = modes::vacuum_theta(a.kpar, s, kUnits);
    for (Direction d : {Direction::forward, Direction::backward}) {
        const double z = 0.2, h = 1e-3;
        const Vec4 l = free_space_particular(a, s, z, d, kUnits);
        const Vec4 dl = (free_space_particular(a, s, z + h, d, kUnits) - free_space_particular(a, s, z - h, d, kUnits)) /
                        (2 * h);
        const Vec4 g = free_space_drive(a, s, z, d, kUnits);
        CHECK((dl + sign_of(d) * theta * l - g).norm() < 1e-5 * g.norm());
    }
}

TEST_CASE("unresolved kz grids are rejected") {
    auto a = packet({0.0, 0.0}, 1.0, 0.5);
    a.plus.back()[0] = 1e-3;
    CHECK(throws_kind([&] { initial_spectra(a, 0.0, Direction::forward, kUnits); }, ErrorKind::resolution));
    const auto coarse = packet({0.0, 0.0}, 1.0, 0.5, 21);
    CHECK(throws_kind([&] { initial_spectra(coarse, 40.0, Direction::forward, kUnits); }, ErrorKind::resolution));
}

TEST_CASE("conjugate-symmetric spectra give real fields") {
    const auto w = symmetric_grid(0.25, 64);
    std::vector<Vec6> f(w.size()), b(w.size(), Vec6::Zero());
    std::mt19937_64 rng(41);
    for (std::size_t k = 0; k < w.size() / 2; ++k) {
        const Vec6 v = random_vec6(rng) * std::exp(-0.5 * w[k] * w[k]);
        f[k] = v;
        f[w.size() - 1 - k] = v.conjugate();
    }
    const auto out = time_reconstruct(w, f, b, {}, Eigen::Vector2d::Zero(), {-3.0, 0.0, 0.7, 5.0});
    for (std::size_t i = 0; i < out.axis.size(); ++i) {
        CHECK(out.e[i].imag().norm() < 1e-12);
        CHECK(out.h[i].imag().norm() < 1e-12);
    }
    CHECK(throws_kind([&] { time_reconstruct(w, f, b, {}, Eigen::Vector2d::Zero(), {20.0}); }, ErrorKind::resolution));
}

TEST_CASE("vacuum pulse travels at c") {
    // Ex = Hy = g(z) at t = 0 moves to +z unchanged.
    auto g = [](double z) { return std::exp(-0.5 * z * z); };
    stack::LayerStack st;
    st.left = {"vac", medium::ConstantModel{}};
    st.right = st.left;
    st.layers.push_back({1.0, st.left});
    const double z0 = 2.0;
    const auto w = symmetric_grid(2.0 * std::numbers::pi / 16.0, 64);
    std::vector<Vec6> f, b;
    for (double om : w) {
        for (Direction d : {Direction::forward, Direction::backward}) {
            const auto p = LaplacePoint::harmonic(om, d);
            BlockSource j = [&, d, p](double z) {
                const Vec3 e0(g(z), 0.0, 0.0), h0(0.0, g(z), 0.0);
                return em::source_vector({}, h0, e0, p.s, d, kUnits);
            };
            const auto fr = driven_profile(st, {}, p, d, kUnits, j, {z0});
            Vec6 v;
            v << fr.e[0], fr.h[0];
            (d == Direction::forward ? f : b).push_back(v);
        }
    }
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(-2.0 + 0.2 * i);
    const auto out = time_reconstruct(w, f, b, {}, Eigen::Vector2d::Zero(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(out.e[i](0) - g(z0 - times[i])) < 1e-6);
        CHECK(std::abs(out.h[i](1) - g(z0 - times[i])) < 1e-6);
        CHECK(std::abs(out.e[i](1)) < 1e-6);
    }
}
