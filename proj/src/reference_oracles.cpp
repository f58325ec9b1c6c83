#include "bianiso/reference_oracles.hpp"

#include "bianiso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bianiso::oracle {

namespace {

int levi_civita(int i, int k, int j) {
    if (i == k || k == j || i == j) return 0;
    // Even permutations of (0, 1, 2).
    if ((i == 0 && k == 1 && j == 2) || (i == 1 && k == 2 && j == 0) || (i == 2 && k == 0 && j == 1)) return 1;
    return -1;
}

// Bilinear a × b. Eigen's cross() conjugates complex results.
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

Vec4 rk4_step(const Mat4& a, const std::function<Vec4(double)>& g, const Vec4& y, double z, double h) {
    auto f = [&](double zz, const Vec4& yy) -> Vec4 { return a * yy + (g ? g(zz) : Vec4::Zero()); };
    const Vec4 k1 = f(z, y);
    const Vec4 k2 = f(z + 0.5 * h, y + 0.5 * h * k1);
    const Vec4 k3 = f(z + 0.5 * h, y + 0.5 * h * k2);
    const Vec4 k4 = f(z + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

SlabResponse fresnel_airy(cplx n, double d, double omega, double theta, Polarization pol, const UnitSystem& units) {
    if (n == 0.0) throw Error(ErrorKind::invalid_argument, "refractive index must be nonzero");
    if (!(omega > 0.0)) throw Error(ErrorKind::invalid_argument, "ω must be positive", omega);
    const double ct = std::cos(theta);
    if (!(std::abs(theta) < std::numbers::pi / 2) || std::abs(ct) < 1e-12)
        throw Error(ErrorKind::range, "grazing or backward incidence", theta);
    const double k0 = omega / units.c();
    const double st = std::sin(theta);
    const cplx kz0 = k0 * ct;
    const cplx kz1 = k0 * std::sqrt(n * n - st * st);
    cplx r01, t01, r12, t12;
    if (pol == Polarization::s) {
        r01 = (kz0 - kz1) / (kz0 + kz1);
        t01 = 2.0 * kz0 / (kz0 + kz1);
        r12 = (kz1 - kz0) / (kz1 + kz0);
        t12 = 2.0 * kz1 / (kz1 + kz0);
    } else {
        const cplx n2 = n * n;
        r01 = (n2 * kz0 - kz1) / (n2 * kz0 + kz1);
        t01 = 2.0 * n2 * kz0 / (n2 * kz0 + kz1);
        r12 = (kz1 - n2 * kz0) / (kz1 + n2 * kz0);
        t12 = 2.0 * kz1 / (kz1 + n2 * kz0);
    }
    const cplx e1 = std::exp(kI * kz1 * d);
    const cplx e2 = e1 * e1;
    const cplx den = 1.0 + r01 * r12 * e2;
    return {(r01 + r12 * e2) / den, t01 * t12 * e1 / den};
}

Vec4 integrate_layer(const Mat4& theta, const std::function<Vec4(double)>& g, const Vec4& lambda0, double z0,
                     double z1, Direction dir, double tolerance, IntegrationStats* stats) {
    Vec4 y = lambda0;
    if (z1 == z0) return y;
    const Mat4 a = -sign_of(dir) * theta;
    const double span = z1 - z0;
    const double sgn = span > 0 ? 1.0 : -1.0;
    double h = span / 16.0;
    const double scale = std::abs(theta.norm());
    if (scale > 0.0) h = sgn * std::min(std::abs(h), 0.1 / scale);
    double z = z0;
    IntegrationStats st;
    constexpr int kMaxSteps = 1000000;
    while (sgn * (z1 - z) > 0.0) {
        if (st.steps + st.rejected > kMaxSteps)
            throw Error(ErrorKind::stiffness, "integrator step budget exhausted", z);
        if (sgn * (z + h - z1) > 0.0) h = z1 - z;
        const Vec4 big = rk4_step(a, g, y, z, h);
        const Vec4 half = rk4_step(a, g, rk4_step(a, g, y, z, 0.5 * h), z + 0.5 * h, 0.5 * h);
        const double err = (big - half).norm() / 15.0 / (1.0 + half.norm());
        if (err <= tolerance) {
            y = half;
            z += h;
            ++st.steps;
            const double grow = err == 0.0 ? 2.0 : std::min(2.0, 0.9 * std::pow(tolerance / err, 0.2));
            h *= grow;
        } else {
            ++st.rejected;
            h *= std::max(0.1, 0.9 * std::pow(tolerance / err, 0.2));
            if (std::abs(h) < 1e-14 * std::abs(span))
                throw Error(ErrorKind::stiffness, "integrator step underflow", z);
        }
    }
    if (stats) *stats = st;
    return y;
}

double residual_full_system(const std::vector<double>& zgrid, const std::vector<Vec6>& fields,
                            const medium::EtaSet& eta, const KParallel& kpar, cplx s, Direction dir,
                            const UnitSystem& units, const std::vector<Vec6>& sources) {
    const std::size_t n = zgrid.size();
    if (fields.size() != n || (!sources.empty() && sources.size() != n))
        throw Error(ErrorKind::invalid_argument, "field and source samples must match the z grid");
    if (n < 5) throw Error(ErrorKind::resolution, "fourth-order stencil needs at least five samples");
    const double h = (zgrid.back() - zgrid.front()) / double(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(zgrid[i] - zgrid[i - 1] - h) > 1e-9 * std::abs(h))
            throw Error(ErrorKind::invalid_argument, "residual check needs a uniform z grid");
    }
    const double sg = sign_of(dir);
    // Transverse derivatives of exp(±i k∥·r∥).
    const cplx dx = sg * kI * kpar.kx, dy = sg * kI * kpar.ky;

    double peak = 0.0;
    for (const auto& f : fields) peak = std::max(peak, f.cwiseAbs().maxCoeff());

    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const Vec6 df = (fields[i - 2] - 8.0 * fields[i - 1] + 8.0 * fields[i + 1] - fields[i + 2]) / (12.0 * h);
        const Vec3 e = fields[i].head<3>(), hh = fields[i].tail<3>();
        const Vec3 de = df.head<3>(), dh = df.tail<3>();
        Vec3 curl_e = Vec3::Zero(), curl_h = Vec3::Zero();
        for (int a = 0; a < 3; ++a) {
            for (int k = 0; k < 3; ++k) {
                for (int b = 0; b < 3; ++b) {
                    const int eps = levi_civita(a, k, b);
                    if (eps == 0) continue;
                    const cplx ce = k == 0 ? dx * e(b) : (k == 1 ? dy * e(b) : de(b));
                    const cplx ch = k == 0 ? dx * hh(b) : (k == 1 ? dy * hh(b) : dh(b));
                    curl_e(a) += double(eps) * ce;
                    curl_h(a) += double(eps) * ch;
                }
            }
        }
        const Vec3 row1 = curl_e + sg * units.mu0 * s * (eta.eta3 * e) +
                          sg * units.mu0 * s * (hh + eta.eta4 * hh);
        const Vec3 row2 = -sg * s * (units.eps0 * e + eta.eta1 * e) + curl_h - sg * s * (eta.eta2 * hh);
        Vec6 r;
        r << row1, row2;
        if (!sources.empty()) r -= sources[i];
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst / (1.0 + peak);
}

Vec6 VacuumPlaneWave::at(double z) const {
    const cplx f = std::exp(kappa * z);
    Vec6 out;
    out << e0 * f, h0 * f;
    return out;
}

VacuumPlaneWave vacuum_plane_wave(const KParallel& kpar, cplx s, Direction dir, bool plus_branch, const Vec3& seed,
                                  const UnitSystem& units) {
    const double sg = sign_of(dir);
    const cplx q = std::sqrt(kpar.kx * kpar.kx + kpar.ky * kpar.ky + s * s * units.eps0 * units.mu0);
    VacuumPlaneWave w;
    w.kappa = plus_branch ? q : -q;
    Vec3 g;
    g << sg * kI * kpar.kx, sg * kI * kpar.ky, w.kappa;
    // E = g × seed is transverse to g; H from the first curl equation.
    w.e0 = cross(g, seed);
    if (w.e0.norm() == 0.0) throw Error(ErrorKind::invalid_argument, "seed parallel to the wave vector");
    w.h0 = -sg * cross(g, w.e0) / (units.mu0 * s);
    return w;
}

PrintedCoeffs printed_elimination_coeffs(const Mat6& k) {
    auto T = [&](int i, int j) { return k(i - 1, j - 1); };
    auto Y = [&](int i, int j) { return k(i - 1, j + 2); };
    auto Z = [&](int i, int j) { return k(i + 2, j - 1); };
    auto W = [&](int i, int j) { return k(i + 2, j + 2); };
    const cplx p = T(3, 3) * W(3, 3) - Z(3, 3) * Y(3, 3);
    PrintedCoeffs c;
    c.alpha1 = (Y(3, 3) * Z(3, 1) - W(3, 3) * T(3, 1)) / p;
    c.beta1 = (Y(3, 3) * Z(3, 2) - W(3, 3) * T(3, 2)) / p;
    c.gamma1 = (Y(3, 3) * W(3, 1) - W(3, 3) * Y(3, 1)) / p;
    c.delta1 = (Y(3, 3) * W(3, 2) - W(3, 3) * Y(3, 2)) / p;
    c.alpha2 = (Z(3, 3) * T(3, 1) - T(3, 3) * Z(3, 1)) / p;
    c.beta2 = (Z(3, 3) * T(3, 2) - T(3, 3) * Z(3, 2)) / p;
    c.gamma2 = (Z(3, 3) * Y(3, 1) - T(3, 3) * W(3, 1)) / p;
    c.delta2 = (Z(3, 3) * Y(3, 2) - T(3, 3) * W(3, 2)) / p;
    return c;
}

Mat4 printed_theta(const Mat6& k, const medium::EtaSet& eta, cplx s, double mu0) {
    auto T = [&](int i, int j) { return k(i - 1, j - 1); };
    auto Y = [&](int i, int j) { return k(i - 1, j + 2); };
    auto Z = [&](int i, int j) { return k(i + 2, j - 1); };
    auto W = [&](int i, int j) { return k(i + 2, j + 2); };
    auto e3 = [&](int i, int j) { return eta.eta3(i - 1, j - 1); };
    auto e2 = [&](int i, int j) { return eta.eta2(i - 1, j - 1); };
    const PrintedCoeffs c = printed_elimination_coeffs(k);
    Mat4 t;
    t(0, 0) = mu0 * s * e3(2, 1) + T(2, 3) * c.alpha1 + Y(2, 3) * c.alpha2;
    t(0, 1) = T(2, 2) + T(2, 3) * c.beta1 + Y(2, 3) * c.beta2;
    t(0, 2) = Y(2, 1) + T(2, 3) * c.gamma1 + Y(2, 3) * c.gamma2;
    t(0, 3) = Y(2, 2) + T(2, 3) * c.delta1 + Y(2, 3) * c.delta2;
    t(1, 0) = -T(1, 1) - T(1, 3) * c.alpha1 - Y(1, 3) * c.alpha2;
    t(1, 1) = -mu0 * s * e3(1, 2) - T(1, 3) * c.beta1 - Y(1, 3) * c.beta2;
    t(1, 2) = -Y(1, 1) - T(1, 3) * c.gamma1 - Y(1, 3) * c.gamma2;
    t(1, 3) = -Y(1, 2) - T(1, 3) * c.delta1 - Y(1, 3) * c.delta2;
    t(2, 0) = Z(2, 1) + Z(2, 3) * c.alpha1 + W(2, 3) * c.alpha2;
    t(2, 1) = Z(2, 2) + Z(2, 3) * c.beta1 + W(2, 3) * c.beta2;
    t(2, 2) = -s * e2(2, 1) + Z(2, 3) * c.gamma1 + W(2, 3) * c.gamma2;
    t(2, 3) = W(2, 2) + Z(2, 3) * c.delta1 + W(2, 3) * c.delta2;
    t(3, 0) = -Z(1, 1) - Z(1, 3) * c.alpha1 - W(1, 3) * c.alpha2;
    t(3, 1) = -Z(1, 2) - Z(1, 3) * c.beta1 - W(1, 3) * c.beta2;
    t(3, 2) = -W(1, 1) - Z(1, 3) * c.gamma1 - W(1, 3) * c.gamma2;
    t(3, 3) = -s * e2(1, 2) - Z(1, 3) * c.delta1 - W(1, 3) * c.delta2;
    return t;
}

Vec4 printed_source(const Mat6& k, const Vec6& j) {
    auto T = [&](int a, int b) { return k(a - 1, b - 1); };
    auto Y = [&](int a, int b) { return k(a - 1, b + 2); };
    auto Z = [&](int a, int b) { return k(a + 2, b - 1); };
    auto W = [&](int a, int b) { return k(a + 2, b + 2); };
    auto J = [&](int a) { return j(a - 1); };
    const cplx p = T(3, 3) * W(3, 3) - Z(3, 3) * Y(3, 3);
    Vec4 g;
    g(0) = J(2) + (Z(3, 3) * Y(2, 3) - T(2, 3) * W(3, 3)) / p * J(3) +
           (T(2, 3) * Y(3, 3) - Y(2, 3) * T(3, 3)) / p * J(6);
    g(1) = -J(1) + (T(1, 3) * W(3, 3) - Y(1, 3) * Z(3, 3)) / p * J(3) +
           (T(3, 3) * Y(1, 3) - Y(3, 3) * T(1, 3)) / p * J(6);
    g(2) = J(5) + (W(2, 3) * Z(3, 3) - Z(2, 3) * W(3, 3)) / p * J(3) +
           (Z(2, 3) * Y(3, 3) - W(2, 3) * T(3, 3)) / p * J(6);
    g(3) = -J(4) + (W(3, 3) * Z(1, 3) - Z(3, 3) * W(1, 3)) / p * J(3) +
           (W(1, 3) * T(3, 3) - Z(1, 3) * Y(3, 3)) / p * J(6);
    return g;
}

Mat4 printed_vacuum_theta(const KParallel& kpar, cplx s, const UnitSystem& units) {
    const double kx = kpar.kx, ky = kpar.ky, e0 = units.eps0, m0 = units.mu0;
    Mat4 t;
    t << 0.0, 0.0, -kx * ky / (s * e0), m0 * s + kx * kx / (s * e0),
        0.0, 0.0, -m0 * s - ky * ky / (s * e0), kx * ky / (s * e0),
        kx * ky / (s * m0), -e0 * s - kx * kx / (s * m0), 0.0, 0.0,
        e0 * s + ky * ky / (s * m0), -kx * ky / (s * m0), 0.0, 0.0;
    return t;
}

OracleReport compare(std::string scenario, std::vector<cplx> oracle, std::vector<cplx> solver, double tolerance,
                     bool relative) {
    if (oracle.size() != solver.size())
        throw Error(ErrorKind::invalid_argument, "oracle and solver value counts differ");
    OracleReport r;
    r.scenario = std::move(scenario);
    r.tolerance = tolerance;
    r.relative = relative;
    double ref = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        r.abs_error = std::max(r.abs_error, std::abs(oracle[i] - solver[i]));
        ref = std::max(ref, std::abs(oracle[i]));
    }
    r.rel_error = ref > 0.0 ? r.abs_error / ref : r.abs_error;
    r.pass = (relative ? r.rel_error : r.abs_error) <= tolerance;
    r.oracle = std::move(oracle);
    r.solver = std::move(solver);
    return r;
}

}  // namespace bianiso::oracle
