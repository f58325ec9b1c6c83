#include "bianiso/stack_solver.hpp"

#include "bianiso/errors.hpp"
#include "bianiso/quadrature.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <array>
#include <cmath>
#include <limits>

namespace bianiso::stack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr quad::Tolerance kKernelTol{1e-13, 1e-10};
constexpr double kMaxExponent = 700.0;
constexpr double kMinRcond = 1e-13;

cplx mode_factor(cplx kappa, double z, double anchor) {
    if (z == anchor) return 1.0;
    const cplx arg = kappa * (z - anchor);
    if (arg.real() > kMaxExponent)
        throw Error(ErrorKind::overflow, "mode exponential exceeds the representable range", arg.real());
    return std::exp(arg);
}

bool is_vacuum(const medium::ChiSlice& chi) {
    return chi.chi1.isZero(0.0) && chi.chi2.isZero(0.0) && chi.chi3.isZero(0.0) && chi.chi4.isZero(0.0);
}

}  // namespace

void LayerStack::validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const double d = layers[i].thickness;
        if (!(d > 0.0) || !std::isfinite(d))
            throw Error(ErrorKind::geometry, "layer " + std::to_string(i) + " needs a finite positive thickness", d);
    }
}

std::vector<double> LayerStack::interfaces() const {
    std::vector<double> z{0.0};
    for (const auto& l : layers) z.push_back(z.back() + l.thickness);
    return z;
}

const medium::SusceptibilitySet& LayerStack::region_medium(int r) const {
    if (r == 0) return left;
    if (r == region_count() - 1) return right;
    return layers.at(std::size_t(r - 1)).medium;
}

bool RegionSystem::decays_plus(int j) const {
    const auto c = basis.classes[j];
    if (c == modes::ModeClass::marginal) {
        // Unresolved: fall back on the exact sign.
        return kappa(j).real() < 0.0;
    }
    const bool forward_plus = c == modes::ModeClass::decays_toward_plus_infinity;
    return dir == Direction::forward ? forward_plus : !forward_plus;
}

double RegionSystem::anchor(int j) const {
    if (std::isinf(z_lo)) return z_hi;
    if (std::isinf(z_hi)) return z_lo;
    return decays_plus(j) ? z_lo : z_hi;
}

RegionSystem prepare_region(const medium::SusceptibilitySet& chi, const KParallel& kpar, const LaplacePoint& point,
                            Direction dir, const UnitSystem& units, double z_lo, double z_hi) {
    RegionSystem r;
    r.dir = dir;
    r.z_lo = z_lo;
    r.z_hi = z_hi;
    const medium::ChiSlice slice = chi.laplace(point);
    const medium::EtaSet eta = medium::eliminate_magnetization(slice, units.mu0);
    r.system = em::theta_system(eta, kpar, point.s, dir, units);
    r.basis = modes::eigenmodes(r.system.theta);
    if (point.on_axis() && r.basis.count(modes::ModeClass::marginal) > 0) {
        // Coupling-model tensors are kept at the on-axis value; the other
        // models are cheap to evaluate at the shifted point.
        const bool coupling = std::holds_alternative<medium::CouplingModel>(chi.model);
        const cplx shifted = point.shifted();
        const medium::ChiSlice sslice = coupling ? slice : chi.laplace(LaplacePoint::regular(shifted));
        const medium::EtaSet seta = medium::eliminate_magnetization(sslice, units.mu0);
        const Mat4 stheta = em::theta_system(seta, kpar, shifted, dir, units).theta;
        modes::resolve_marginal(r.basis, stheta);
    }
    return r;
}

Vec4 general_solution(const modes::ModeBasis& basis, const Vec4& coeffs, double z, Direction dir) {
    Vec4 out = Vec4::Zero();
    const double sg = sign_of(dir);
    for (int j = 0; j < 4; ++j) {
        if (coeffs(j) == 0.0) continue;
        const cplx arg = -sg * basis.omega[j] * z;
        if (std::abs(arg.real()) > kMaxExponent)
            throw Error(ErrorKind::overflow, "exponent beyond ±700; use the anchored representation", arg.real());
        out += coeffs(j) * basis.vectors.col(j) * std::exp(arg);
    }
    return out;
}

Vec4 particular_solution(const RegionSystem& region, const RegionDrive& drive, double z) {
    if (!drive) return Vec4::Zero();
    if (z < region.z_lo || z > region.z_hi)
        throw Error(ErrorKind::range, "particular solution requested outside its region", z);
    Eigen::PartialPivLU<Mat4> lu(region.basis.vectors);
    Vec4 y = Vec4::Zero();
    std::array<double, 4> err{};
    double l1 = 0.0;
    const double chop = 64.0 * std::numeric_limits<double>::epsilon() * region.basis.condition;
    for (int j = 0; j < 4; ++j) {
        const cplx kap = region.kappa(j);
        auto integrand = [&](double zp) -> cplx {
            const Vec4 gt = lu.solve(drive.g(zp));
            // Projections at roundoff level are noise, not signal.
            if (std::abs(gt(j)) <= chop * gt.cwiseAbs().maxCoeff()) return 0.0;
            return std::exp(kap * (z - zp)) * gt(j);
        };
        quad::Estimate<cplx> est;
        if (region.decays_plus(j)) {
            if (z == region.z_lo) continue;
            est = quad::integrate(integrand, region.z_lo, z, kKernelTol);
        } else {
            if (z == region.z_hi) continue;
            est = quad::integrate(integrand, z, region.z_hi, kKernelTol);
            est.value = -est.value;
        }
        y(j) = est.value;
        err[std::size_t(j)] = est.error;
        l1 = std::max(l1, est.l1);
    }
    // Accuracy is judged against the largest modal term, or the size of the
    // integrand when oscillation cancels it: a mode the drive barely projects
    // onto only carries roundoff.
    const double scale = std::max(y.cwiseAbs().maxCoeff(), l1);
    for (int j = 0; j < 4; ++j) {
        const double e = err[std::size_t(j)];
        if (!std::isfinite(std::abs(y(j))) || e > std::max(kKernelTol.absolute, kKernelTol.relative * scale))
            throw Error(ErrorKind::quadrature,
                        "particular-solution kernel integral for mode " + std::to_string(j) + " did not converge", e);
    }
    return region.basis.vectors * y;
}

int StackSolution::region_of(double z) const {
    if (!std::isfinite(z)) throw Error(ErrorKind::range, "z must be finite", z);
    int r = 0;
    while (r < int(interfaces.size()) && z >= interfaces[std::size_t(r)]) ++r;
    return r;
}

Vec4 StackSolution::homogeneous(double z, int region) const {
    const RegionSystem& rs = regions.at(std::size_t(region));
    if (z < rs.z_lo || z > rs.z_hi) throw Error(ErrorKind::range, "z outside region " + std::to_string(region), z);
    Vec4 out = Vec4::Zero();
    const Vec4& c = coeffs[std::size_t(region)];
    for (int j = 0; j < 4; ++j) {
        if (c(j) == 0.0) continue;
        out += c(j) * rs.basis.vectors.col(j) * mode_factor(rs.kappa(j), z, rs.anchor(j));
    }
    return out;
}

Vec4 StackSolution::incident_part(double z, int region) const {
    const int last = int(regions.size()) - 1;
    if (region != 0 && region != last) return Vec4::Zero();
    const RegionSystem& rs = regions[std::size_t(region)];
    const Vec4& inc = region == 0 ? incident.left : incident.right;
    Vec4 out = Vec4::Zero();
    for (int j = 0; j < 4; ++j) {
        const bool incoming = region == 0 ? rs.decays_plus(j) : !rs.decays_plus(j);
        if (!incoming || inc(j) == 0.0) continue;
        out += inc(j) * rs.basis.vectors.col(j) * mode_factor(rs.kappa(j), z, rs.anchor(j));
    }
    return out;
}

Vec4 StackSolution::lambda(double z, int region) const {
    Vec4 out = homogeneous(z, region) + incident_part(z, region);
    if (std::size_t(region) < drives.size() && drives[std::size_t(region)])
        out += particular_solution(regions[std::size_t(region)], drives[std::size_t(region)], z);
    return out;
}

Vec4 StackSolution::lambda(double z) const { return lambda(z, region_of(z)); }

em::Vec2 StackSolution::longitudinal(double z, int region, const Vec6& j) const {
    return em::recover_longitudinal(regions.at(std::size_t(region)).system, lambda(z, region), j);
}

double StackSolution::max_interface_jump() const {
    double jump = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
        const Vec4 a = lambda(interfaces[i], int(i));
        const Vec4 b = lambda(interfaces[i], int(i) + 1);
        jump = std::max(jump, (a - b).norm());
        peak = std::max({peak, a.norm(), b.norm()});
    }
    return jump / (1.0 + peak);
}

bool StackSolution::decay_conditions_hold() const {
    const RegionSystem& l = regions.front();
    const RegionSystem& r = regions.back();
    for (int j = 0; j < 4; ++j) {
        if (l.decays_plus(j) && coeffs.front()(j) != 0.0) return false;
        if (!r.decays_plus(j) && coeffs.back()(j) != 0.0) return false;
    }
    return true;
}

StackSolution match_slab(const LayerStack& stack, const KParallel& kpar, const LaplacePoint& point, Direction dir,
                         const UnitSystem& units, const std::vector<RegionDrive>& drives,
                         const IncidentData& incident) {
    stack.validate();
    StackSolution sol;
    sol.dir = dir;
    sol.kpar = kpar;
    sol.point = point;
    sol.interfaces = stack.interfaces();
    sol.incident = incident;
    sol.drives = drives;
    const int nreg = stack.region_count();
    if (!drives.empty() && int(drives.size()) != nreg)
        throw Error(ErrorKind::invalid_argument, "one drive slot per region is required");
    sol.drives.resize(std::size_t(nreg));

    for (int r = 0; r < nreg; ++r) {
        const double lo = r == 0 ? -kInf : sol.interfaces[std::size_t(r - 1)];
        const double hi = r == nreg - 1 ? kInf : sol.interfaces[std::size_t(r)];
        sol.regions.push_back(prepare_region(stack.region_medium(r), kpar, point, dir, units, lo, hi));
    }
    for (int r : {0, nreg - 1}) {
        const RegionSystem& rs = sol.regions[std::size_t(r)];
        int plus = 0;
        for (int j = 0; j < 4; ++j) {
            if (rs.basis.classes[j] == modes::ModeClass::marginal)
                throw Error(ErrorKind::geometry, "half-space mode left marginal", std::abs(rs.basis.omega[j]));
            if (rs.decays_plus(j)) ++plus;
        }
        if (plus != 2)
            throw Error(ErrorKind::geometry, std::string(r == 0 ? "left" : "right") +
                                                 " half-space modes do not split 2/2 by decay direction",
                        plus);
    }

    // Unknown layout: left outgoing (2), 4 per layer, right outgoing (2).
    std::vector<std::vector<int>> column(std::size_t(nreg), std::vector<int>(4, -1));
    int n = 0;
    for (int r = 0; r < nreg; ++r) {
        const RegionSystem& rs = sol.regions[std::size_t(r)];
        for (int j = 0; j < 4; ++j) {
            const bool allowed = r == 0 ? !rs.decays_plus(j) : (r == nreg - 1 ? rs.decays_plus(j) : true);
            if (allowed) column[std::size_t(r)][std::size_t(j)] = n++;
        }
    }
    const int m = 4 * int(sol.interfaces.size());
    if (n != m) throw Error(ErrorKind::geometry, "matching system is not square", n);

    sol.coeffs.assign(std::size_t(nreg), Vec4::Zero());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m);
    for (std::size_t i = 0; i < sol.interfaces.size(); ++i) {
        const double z = sol.interfaces[i];
        const int left = int(i), right = int(i) + 1;
        for (int side : {left, right}) {
            const double sg = side == left ? 1.0 : -1.0;
            const RegionSystem& rs = sol.regions[std::size_t(side)];
            for (int j = 0; j < 4; ++j) {
                const int c = column[std::size_t(side)][std::size_t(j)];
                if (c < 0) continue;
                a.block(4 * int(i), c, 4, 1) += sg * rs.basis.vectors.col(j) * mode_factor(rs.kappa(j), z, rs.anchor(j));
            }
            // Known parts move to the right-hand side.
            Vec4 known = sol.incident_part(z, side);
            if (sol.drives[std::size_t(side)]) known += particular_solution(rs, sol.drives[std::size_t(side)], z);
            rhs.segment(4 * int(i), 4) -= sg * known;
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    sol.rcond = lu.rcond();
    if (!(sol.rcond >= kMinRcond))
        throw Error(ErrorKind::ill_conditioned, "interface system is singular to working precision",
                    sol.rcond > 0.0 ? 1.0 / sol.rcond : kInf);
    Eigen::VectorXcd x = lu.solve(rhs);
    x += lu.solve(rhs - a * x);  // one refinement step
    for (int r = 0; r < nreg; ++r) {
        for (int j = 0; j < 4; ++j) {
            const int c = column[std::size_t(r)][std::size_t(j)];
            if (c >= 0) sol.coeffs[std::size_t(r)](j) = x(c);
        }
    }
    return sol;
}

Eigen::Vector3d s_direction(const KParallel& kpar) {
    const double k = kpar.norm();
    if (k == 0.0) return Eigen::Vector3d(0.0, 1.0, 0.0);
    return Eigen::Vector3d(-kpar.ky / k, kpar.kx / k, 0.0);
}

ScatterResult scattering_matrices(const LayerStack& stack, const KParallel& kpar, double omega,
                                  const UnitSystem& units) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw Error(ErrorKind::invalid_argument, "scattering needs a finite ω > 0", omega);
    const double k0 = omega / units.c();
    const double kp = kpar.norm();
    if (!(kp < k0)) throw Error(ErrorKind::range, "evanescent incidence is not supported", kp / k0);
    const LaplacePoint point = LaplacePoint::harmonic(omega, Direction::forward);
    if (!is_vacuum(stack.left.laplace(point)) || !is_vacuum(stack.right.laplace(point)))
        throw Error(ErrorKind::geometry, "scattering matrices need vacuum half-spaces");

    const double eta0 = units.impedance();
    const double kz = std::sqrt(k0 * k0 - kp * kp);
    const Eigen::Vector3d kvec(kpar.kx, kpar.ky, kz);
    const Eigen::Vector3d sh = s_direction(kpar);

    ScatterResult out;
    out.omega = omega;
    out.kpar = kpar;

    const double z_last = stack.interfaces().back();
    for (int pol = 0; pol < 2; ++pol) {
        Eigen::Vector3d e, h;
        if (pol == 0) {
            e = sh;
            h = kvec.cross(e) / (omega * units.mu0);
        } else {
            h = sh / eta0;
            e = -kvec.cross(h) / (omega * units.eps0);
        }
        Vec4 target;
        target << e(0), e(1), h(0), h(1);

        // Express the incident wave in the incoming modes of the left half-space.
        const RegionSystem left =
            prepare_region(stack.left, kpar, point, Direction::forward, units, -kInf, 0.0);
        std::vector<int> incoming;
        for (int j = 0; j < 4; ++j)
            if (left.decays_plus(j)) incoming.push_back(j);
        if (incoming.size() != 2)
            throw Error(ErrorKind::geometry, "left half-space lacks two incoming modes", double(incoming.size()));
        Eigen::Matrix<cplx, 4, 2> vin;
        vin.col(0) = left.basis.vectors.col(incoming[0]);
        vin.col(1) = left.basis.vectors.col(incoming[1]);
        const Eigen::Vector2cd c = vin.colPivHouseholderQr().solve(target);
        if ((vin * c - target).norm() > 1e-9 * target.norm())
            throw Error(ErrorKind::geometry, "incident plane wave is not a combination of incoming modes");
        IncidentData inc;
        inc.left(incoming[0]) = c(0);
        inc.left(incoming[1]) = c(1);

        const StackSolution sol = match_slab(stack, kpar, point, Direction::forward, units, {}, inc);
        const Vec4 refl = sol.homogeneous(0.0, 0);
        const Vec4 tran = sol.homogeneous(z_last, int(sol.regions.size()) - 1);
        auto project = [&](const Vec4& l, int comp) {
            return comp == 0 ? sh(0) * l(0) + sh(1) * l(1) : eta0 * (sh(0) * l(2) + sh(1) * l(3));
        };
        for (int o = 0; o < 2; ++o) {
            out.r(o, pol) = project(refl, o);
            out.t(o, pol) = project(tran, o);
        }
        out.reflectance[pol] = std::norm(out.r(0, pol)) + std::norm(out.r(1, pol));
        out.transmittance[pol] = std::norm(out.t(0, pol)) + std::norm(out.t(1, pol));
    }
    return out;
}

}  // namespace bianiso::stack
