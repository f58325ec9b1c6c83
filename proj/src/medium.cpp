#include "bianiso/medium.hpp"

#include "bianiso/errors.hpp"
#include "bianiso/quadrature.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bianiso::medium {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularCondition = 1e12;

// Tensor slots of the three independent spectral densities.
enum Slot { s11 = 0, s12 = 1, s44 = 2 };
constexpr const char* kSlotName[3] = {"chi1", "chi2", "chi4"};

std::string component_name(int slot, int i, int j) {
    std::ostringstream os;
    os << kSlotName[slot] << "[" << i << "][" << j << "]";
    return os.str();
}

double envelope(double a, double w) { return (2.0 * a / kPi) / (w * w + a * a); }

void check_finite(const RealTensor3& m, const char* what) {
    if (!m.allFinite()) throw Error(ErrorKind::invalid_argument, std::string(what) + " has non-finite entries");
}

void validate(const EnvelopeReservoir& r) {
    if (!(r.width > 0.0) || !std::isfinite(r.width))
        throw Error(ErrorKind::invalid_argument, "envelope width must be positive", r.width);
    check_finite(r.f, "envelope coupling f");
    check_finite(r.g, "envelope coupling g");
}

void validate(const TabulatedReservoir& r) {
    const auto n = r.omega.size();
    if (n < 2) throw Error(ErrorKind::invalid_argument, "tabulated reservoir needs at least two samples");
    if (r.f.size() != n || r.g.size() != n)
        throw Error(ErrorKind::invalid_argument, "tabulated reservoir sample counts differ");
    if (!(r.omega.front() >= 0.0)) throw Error(ErrorKind::invalid_argument, "tabulated grid must start at ω >= 0");
    for (std::size_t k = 1; k < n; ++k) {
        if (!(r.omega[k] > r.omega[k - 1]))
            throw Error(ErrorKind::invalid_argument, "tabulated ω grid is not strictly increasing", r.omega[k]);
    }
    if (!std::isfinite(r.omega.back())) throw Error(ErrorKind::invalid_argument, "tabulated grid must be finite");
    for (std::size_t k = 0; k < n; ++k) {
        check_finite(r.f[k], "tabulated coupling f");
        check_finite(r.g[k], "tabulated coupling g");
    }
}

struct Densities {
    RealTensor3 d[3];
};

// Piecewise-linear couplings of one tabulated reservoir at ω.
Densities tabulated_densities(const TabulatedReservoir& r, double w) {
    Densities out;
    for (auto& m : out.d) m.setZero();
    if (w < r.omega.front() || w > r.omega.back()) return out;
    auto it = std::upper_bound(r.omega.begin(), r.omega.end(), w);
    std::size_t k = it == r.omega.end() ? r.omega.size() - 2 : std::size_t(it - r.omega.begin()) - 1;
    k = std::min(k, r.omega.size() - 2);
    const double x = (w - r.omega[k]) / (r.omega[k + 1] - r.omega[k]);
    const RealTensor3 f = (1.0 - x) * r.f[k] + x * r.f[k + 1];
    const RealTensor3 g = (1.0 - x) * r.g[k] + x * r.g[k + 1];
    out.d[s11] = f * f.transpose();
    out.d[s12] = f * g.transpose();
    out.d[s44] = g * g.transpose();
    return out;
}

template <class F>
auto integrate_over(F&& f, const std::vector<double>& breaks, const std::string& what) {
    using Value = decltype(f(0.0));
    Value total{};
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        if (!(breaks[k + 1] > breaks[k])) continue;
        auto est = quad::integrate(f, breaks[k], breaks[k + 1]);
        if (!est.converged) {
            throw Error(ErrorKind::quadrature, "no convergence for " + what, est.error);
        }
        total += est.value;
    }
    return total;
}

std::vector<double> breakpoints(const TabulatedReservoir& r, double extra) {
    std::vector<double> b = r.omega;
    if (extra > b.front() && extra < b.back()) b.push_back(extra);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

void accumulate(ChiSlice& out, int slot, int i, int j, cplx v) {
    switch (slot) {
    case s11: out.chi1(i, j) += v; break;
    case s12:
        out.chi2(i, j) += v;
        out.chi3(j, i) += v;
        break;
    case s44: out.chi4(i, j) += v; break;
    }
}

void accumulate(ChiTime& out, int slot, int i, int j, double v) {
    switch (slot) {
    case s11: out.chi1(i, j) += v; break;
    case s12:
        out.chi2(i, j) += v;
        out.chi3(j, i) += v;
        break;
    case s44: out.chi4(i, j) += v; break;
    }
}

// Constant tensors multiplying the envelope.
Densities envelope_tensors(const EnvelopeReservoir& r) {
    Densities out;
    out.d[s11] = r.f * r.f.transpose();
    out.d[s12] = r.f * r.g.transpose();
    out.d[s44] = r.g * r.g.transpose();
    return out;
}

bool tensor_is_zero(const RealTensor3& m) { return (m.array() == 0.0).all(); }

// ω = a u / (1 - u) maps [0, 1) onto [0, ∞).
template <class F>
cplx integrate_semi_infinite(F&& f, double a, double extra, const std::string& what) {
    auto mapped = [&](double u) -> cplx {
        const double v = 1.0 - u;
        const double w = a * u / v;
        return f(w) * (a / (v * v));
    };
    std::vector<double> b{0.0, 1.0};
    if (extra > 0.0 && std::isfinite(extra)) b.insert(b.begin() + 1, extra / (a + extra));
    return integrate_over(mapped, b, what);
}

cplx envelope_laplace(const EnvelopeReservoir& r, const LaplacePoint& p, std::size_t index) {
    const double a = r.width;
    const std::string what = "envelope reservoir " + std::to_string(index) + " (all components)";
    if (!p.on_axis()) {
        const cplx s2 = p.s * p.s;
        const double y = std::abs(p.s.imag());
        try {
            return integrate_semi_infinite([&](double w) { return cplx(envelope(a, w)) / (s2 + w * w); }, a, y, what);
        } catch (const Error& e) {
            throw Error(ErrorKind::quadrature, std::string(e.what()) + " near resonant ω", y);
        }
    }
    const double y = p.s.imag();
    if (p.s.real() != 0.0) throw Error(ErrorKind::invalid_argument, "limit points must lie on the imaginary axis");
    if (y == 0.0) throw Error(ErrorKind::quadrature, what + ": static limit diverges", 0.0);
    const double ay = std::abs(y);
    const double wy = envelope(a, ay);
    const cplx pv = integrate_semi_infinite(
        [&](double w) {
            const double den = w * w - y * y;
            if (den == 0.0) return cplx(-(2.0 * a / kPi) / ((w * w + a * a) * (y * y + a * a)));
            return cplx((envelope(a, w) - wy) / den);
        },
        a, ay, what);
    const double sgn = y > 0.0 ? 1.0 : -1.0;
    return pv - kI * (sgn * kPi * wy / (2.0 * ay));
}

void tabulated_laplace(const TabulatedReservoir& r, const LaplacePoint& p, std::size_t index, ChiSlice& out) {
    const double y = p.s.imag();
    const double ay = std::abs(y);
    const double lo = r.omega.front();
    const double hi = r.omega.back();
    const auto b = breakpoints(r, ay);
    const std::string prefix = "tabulated reservoir " + std::to_string(index) + " ";
    const bool singular = p.on_axis() && ay >= lo && ay <= hi && ay > 0.0;
    if (p.on_axis() && p.s.real() != 0.0)
        throw Error(ErrorKind::invalid_argument, "limit points must lie on the imaginary axis");
    if (p.on_axis() && ay == 0.0 && lo == 0.0) {
        const Densities d0 = tabulated_densities(r, 0.0);
        for (const auto& m : d0.d) {
            if (!tensor_is_zero(m))
                throw Error(ErrorKind::quadrature, prefix + "static limit diverges (nonzero density at ω = 0)", 0.0);
        }
    }
    const Densities at_y = singular ? tabulated_densities(r, ay) : Densities{};
    const cplx s2 = p.on_axis() ? cplx(-y * y) : p.s * p.s;

    for (int slot = 0; slot < 3; ++slot) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const std::string what = prefix + component_name(slot, i, j);
                cplx v;
                if (singular) {
                    const double sy = at_y.d[slot](i, j);
                    auto integrand = [&](double w) {
                        const double den = w * w - y * y;
                        const double num = tabulated_densities(r, w).d[slot](i, j) - sy;
                        return cplx(den == 0.0 ? 0.0 : num / den);
                    };
                    v = integrate_over(integrand, b, what);
                    // PV of 1/(ω² - y²) over the support, then the half-residue.
                    const auto logterm = [&](double w) { return std::log(std::abs((w - ay) / (w + ay))); };
                    v += sy * (logterm(hi) - (lo == 0.0 ? 0.0 : logterm(lo))) / (2.0 * ay);
                    const double sgn = y > 0.0 ? 1.0 : -1.0;
                    v -= kI * (sgn * kPi * sy / (2.0 * ay));
                } else {
                    auto integrand = [&](double w) { return cplx(tabulated_densities(r, w).d[slot](i, j)) / (s2 + w * w); };
                    try {
                        v = integrate_over(integrand, b, what);
                    } catch (const Error& e) {
                        throw Error(ErrorKind::quadrature, std::string(e.what()) + " near resonant ω", ay);
                    }
                }
                if (!std::isfinite(std::abs(v)))
                    throw Error(ErrorKind::quadrature, "non-finite result for " + what, ay);
                accumulate(out, slot, i, j, v);
            }
        }
    }
}

double envelope_time(const EnvelopeReservoir& r, double t, std::size_t index) {
    thread_local boost::math::quadrature::ooura_fourier_sin<double> sine(1e-13);
    const double a = r.width;
    auto [v, err] = sine.integrate([a](double w) { return envelope(a, w) / w; }, t);
    if (!std::isfinite(v) || err > std::max(1e-10, 1e-8 * std::abs(v)))
        throw Error(ErrorKind::quadrature,
                    "no convergence for envelope reservoir " + std::to_string(index) + " (all components)", err);
    return v;
}

void tabulated_time(const TabulatedReservoir& r, double t, std::size_t index, ChiTime& out) {
    const std::string prefix = "tabulated reservoir " + std::to_string(index) + " ";
    for (int slot = 0; slot < 3; ++slot) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                auto integrand = [&](double w) {
                    const double kernel = w == 0.0 ? t : std::sin(w * t) / w;
                    return kernel * tabulated_densities(r, w).d[slot](i, j);
                };
                const double v = integrate_over(integrand, r.omega, prefix + component_name(slot, i, j));
                accumulate(out, slot, i, j, v);
            }
        }
    }
}

Tensor3 solve_right(const Eigen::PartialPivLU<Tensor3>& lu, const Tensor3& left) {
    return left * lu.inverse();
}

double condition_number(const Tensor3& a) {
    const Eigen::Vector3d sv = Eigen::JacobiSVD<Tensor3>(a).singularValues();
    const double lo = sv.minCoeff();
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return sv.maxCoeff() / lo;
}

// Factor inverted by the chosen convention: I - μ0 χ4 (rederived) or
// I - μ0 χ3 (printed).
Tensor3 inverted_factor(const ChiSlice& chi, double mu0, EliminationConvention convention) {
    const Tensor3& x = convention == EliminationConvention::rederived ? chi.chi4 : chi.chi3;
    return Tensor3::Identity() - mu0 * x;
}

double check_condition(const Tensor3& a) {
    const double cond = condition_number(a);
    if (!(cond <= kSingularCondition))
        throw Error(ErrorKind::elimination, "I - μ0 χ is numerically singular (condition estimate attached)", cond);
    return cond;
}

}  // namespace

CouplingModel::CouplingModel(std::vector<Reservoir> reservoirs) : reservoirs_(std::move(reservoirs)) {
    for (const auto& r : reservoirs_) std::visit([](const auto& x) { validate(x); }, r);
}

ChiTime susceptibility_time(const CouplingModel& model, double t) {
    if (!std::isfinite(t) || t < 0.0) throw Error(ErrorKind::invalid_argument, "susceptibility time must be finite and >= 0", t);
    ChiTime out;
    if (t == 0.0) return out;
    std::size_t index = 0;
    for (const auto& r : model.reservoirs()) {
        if (const auto* env = std::get_if<EnvelopeReservoir>(&r)) {
            const Densities d = envelope_tensors(*env);
            if (!(tensor_is_zero(d.d[s11]) && tensor_is_zero(d.d[s12]) && tensor_is_zero(d.d[s44]))) {
                const double k = envelope_time(*env, t, index);
                out.chi1 += k * d.d[s11];
                out.chi2 += k * d.d[s12];
                out.chi3 += k * d.d[s12].transpose();
                out.chi4 += k * d.d[s44];
            }
        } else {
            tabulated_time(std::get<TabulatedReservoir>(r), t, index, out);
        }
        ++index;
    }
    return out;
}

ChiSlice susceptibility_laplace(const CouplingModel& model, const LaplacePoint& point) {
    if (!std::isfinite(std::abs(point.s))) throw Error(ErrorKind::invalid_argument, "non-finite Laplace point");
    if (!point.on_axis() && !(point.s.real() > 0.0))
        throw Error(ErrorKind::invalid_argument, "Laplace point needs Re s > 0 or the on-axis limit", point.s.real());
    ChiSlice out;
    std::size_t index = 0;
    for (const auto& r : model.reservoirs()) {
        if (const auto* env = std::get_if<EnvelopeReservoir>(&r)) {
            const Densities d = envelope_tensors(*env);
            if (!(tensor_is_zero(d.d[s11]) && tensor_is_zero(d.d[s12]) && tensor_is_zero(d.d[s44]))) {
                const cplx k = envelope_laplace(*env, point, index);
                out.chi1 += k * d.d[s11].cast<cplx>();
                out.chi2 += k * d.d[s12].cast<cplx>();
                out.chi3 += k * d.d[s12].transpose().cast<cplx>();
                out.chi4 += k * d.d[s44].cast<cplx>();
            }
        } else {
            tabulated_laplace(std::get<TabulatedReservoir>(r), point, index, out);
        }
        ++index;
    }
    return out;
}

namespace {

cplx pole_value(const LorentzPole& p, cplx s) {
    const cplx den = s * s + p.gamma * s + p.omega0 * p.omega0;
    const double scale = std::norm(s) + p.omega0 * p.omega0;
    if (std::abs(den) <= 1e-14 * scale)
        throw Error(ErrorKind::quadrature, "Laplace point sits on an undamped resonance", p.omega0);
    return 1.0 / den;
}

double pole_kernel(const LorentzPole& p, double t) {
    const double nu2 = p.omega0 * p.omega0 - 0.25 * p.gamma * p.gamma;
    const double decay = 0.5 * p.gamma;
    if (nu2 > 0.0) {
        const double nu = std::sqrt(nu2);
        return std::exp(-decay * t) * std::sin(nu * t) / nu;
    }
    if (nu2 < 0.0) {
        // Overdamped: split sinh so neither exponential overflows.
        const double kap = std::sqrt(-nu2);
        return 0.5 * (std::exp((kap - decay) * t) - std::exp(-(kap + decay) * t)) / kap;
    }
    return std::exp(-decay * t) * t;
}

Tensor3 pole_sum(const std::vector<LorentzPole>& poles, cplx s) {
    Tensor3 out = Tensor3::Zero();
    for (const auto& p : poles) out += p.amplitude * pole_value(p, s);
    return out;
}

RealTensor3 pole_time_sum(const std::vector<LorentzPole>& poles, double t) {
    RealTensor3 out = RealTensor3::Zero();
    for (const auto& p : poles) {
        if (p.amplitude.imag().cwiseAbs().maxCoeff() != 0.0)
            throw Error(ErrorKind::invalid_argument, "time-domain kernel needs real pole amplitudes");
        out += p.amplitude.real() * pole_kernel(p, t);
    }
    return out;
}

}  // namespace

ChiSlice susceptibility_laplace(const PoleModel& model, const LaplacePoint& point) {
    if (!point.on_axis() && !(point.s.real() > 0.0))
        throw Error(ErrorKind::invalid_argument, "Laplace point needs Re s > 0 or the on-axis limit", point.s.real());
    ChiSlice out;
    out.chi1 = pole_sum(model.chi1, point.s);
    out.chi3 = pole_sum(model.chi3, point.s);
    out.chi2 = out.chi3.transpose();
    out.chi4 = pole_sum(model.chi4, point.s);
    return out;
}

ChiTime susceptibility_time(const PoleModel& model, double t) {
    if (!std::isfinite(t) || t < 0.0) throw Error(ErrorKind::invalid_argument, "susceptibility time must be finite and >= 0", t);
    ChiTime out;
    if (t == 0.0) return out;
    out.chi1 = pole_time_sum(model.chi1, t);
    out.chi3 = pole_time_sum(model.chi3, t);
    out.chi2 = out.chi3.transpose();
    out.chi4 = pole_time_sum(model.chi4, t);
    return out;
}

ConstantModel ConstantModel::isotropic_index(cplx n, double eps0) {
    ConstantModel m;
    m.chi1 = Tensor3::Identity() * (eps0 * (n * n - 1.0));
    return m;
}

ChiSlice SusceptibilitySet::laplace(const LaplacePoint& point) const {
    return std::visit(
        [&](const auto& m) -> ChiSlice {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ConstantModel>) {
                ChiSlice out;
                out.chi1 = m.chi1;
                out.chi3 = m.chi3;
                out.chi2 = m.chi3.transpose();
                out.chi4 = m.chi4;
                return out;
            } else {
                return susceptibility_laplace(m, point);
            }
        },
        model);
}

ChiTime SusceptibilitySet::time(double t) const {
    return std::visit(
        [&](const auto& m) -> ChiTime {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ConstantModel>) {
                throw Error(ErrorKind::invalid_argument, "layer '" + layer_id + "' has no time-domain kernel");
            } else {
                return susceptibility_time(m, t);
            }
        },
        model);
}

EtaSet eliminate_magnetization(const ChiSlice& chi, double mu0, EliminationConvention convention) {
    const Tensor3 a = inverted_factor(chi, mu0, convention);
    EtaSet eta;
    eta.convention = convention;
    eta.condition = check_condition(a);
    Eigen::PartialPivLU<Tensor3> lu(a);
    if (convention == EliminationConvention::rederived) {
        const Tensor3 x2 = solve_right(lu, chi.chi2);  // χ2 A⁻¹
        eta.eta3 = lu.solve(chi.chi3);
        eta.eta4 = mu0 * lu.solve(chi.chi4);
        eta.eta1 = chi.chi1 + mu0 * x2 * chi.chi3;
        eta.eta2 = mu0 * x2;
        // Pure dielectric: keep η1 = χ1 bit-exact.
        if (chi.chi2.isZero(0.0) && chi.chi3.isZero(0.0)) eta.eta1 = chi.chi1;
    } else {
        const Tensor3 x2 = solve_right(lu, chi.chi2);
        eta.eta1 = chi.chi1 + mu0 * x2 * chi.chi4;
        eta.eta2 = mu0 * x2;
        eta.eta3 = lu.solve(chi.chi4);
        eta.eta4 = mu0 * solve_right(lu, chi.chi3);
    }
    return eta;
}

NoiseSources transform_noise_sources(const ChiSlice& chi, const NoiseSources& raw, double mu0,
                                     EliminationConvention convention) {
    const Tensor3 a = inverted_factor(chi, mu0, convention);
    check_condition(a);
    Eigen::PartialPivLU<Tensor3> lu(a);
    NoiseSources out;
    out.m = lu.solve(raw.m);
    out.p = raw.p + mu0 * chi.chi2 * out.m;
    return out;
}

double constitutive_residual(const ChiSlice& chi, const NoiseSources& raw, const EtaSet& eta,
                             const NoiseSources& primed, const Vec3& e, const Vec3& h, double mu0) {
    const Vec3 p = primed.p + eta.eta1 * e + eta.eta2 * h;
    const Vec3 m = primed.m + eta.eta3 * e + eta.eta4 * h;
    const Vec3 b = mu0 * (h + m);
    const Vec3 rp = p - (raw.p + chi.chi1 * e + chi.chi2 * b);
    const Vec3 rm = m - (raw.m + chi.chi3 * e + chi.chi4 * b);
    const double scale = 1.0 + std::max({p.norm(), m.norm(), e.norm(), h.norm()});
    return std::max(rp.norm(), rm.norm()) / scale;
}

EliminationComparison compare_conventions(const ChiSlice& chi, double mu0, const NoiseSources& raw,
                                          const Vec3& e, const Vec3& h) {
    EliminationComparison out;
    const EtaSet d = eliminate_magnetization(chi, mu0, EliminationConvention::rederived);
    const EtaSet p = eliminate_magnetization(chi, mu0, EliminationConvention::printed);
    out.max_difference[0] = (d.eta1 - p.eta1).cwiseAbs().maxCoeff();
    out.max_difference[1] = (d.eta2 - p.eta2).cwiseAbs().maxCoeff();
    out.max_difference[2] = (d.eta3 - p.eta3).cwiseAbs().maxCoeff();
    out.max_difference[3] = (d.eta4 - p.eta4).cwiseAbs().maxCoeff();
    out.rederived_residual = constitutive_residual(
        chi, raw, d, transform_noise_sources(chi, raw, mu0, EliminationConvention::rederived), e, h, mu0);
    out.printed_residual = constitutive_residual(
        chi, raw, p, transform_noise_sources(chi, raw, mu0, EliminationConvention::printed), e, h, mu0);
    return out;
}

}  // namespace bianiso::medium
