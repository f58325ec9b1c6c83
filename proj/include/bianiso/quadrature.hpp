#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <algorithm>

namespace bianiso::quad {

struct Tolerance {
    double absolute = 1e-10;
    double relative = 1e-8;
};

template <class T>
struct Estimate {
    T value{};
    double error = 0.0;
    double l1 = 0.0;  // integral of |f|
    bool converged = false;
};

// Adaptive 31-point Gauss–Kronrod on [a, b]; either bound may be infinite.
// Works for real or std::complex integrands.
template <class F>
auto integrate(F&& f, double a, double b, Tolerance tol = {}, unsigned max_depth = 18) {
    using Value = decltype(f(a));
    Estimate<Value> out;
    // A span of a few ulps carries no information beyond one sample, and the
    // adaptive rule would subdivide roundoff to full depth.
    if (std::isfinite(a) && std::isfinite(b) &&
        std::abs(b - a) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), 1.0})) {
        out.value = f(0.5 * (a + b)) * (b - a);
        out.l1 = std::abs(out.value);
        out.converged = std::isfinite(std::abs(out.value));
        return out;
    }
    double error = 0.0;
    double l1 = 0.0;
    Value v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, max_depth, 0.1 * tol.relative, &error, &l1);
    out.value = v;
    out.error = error;
    out.l1 = l1;
    // Cancelling integrands cannot do better than roundoff on the L1 norm.
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * l1;
    out.converged = std::isfinite(std::abs(v)) &&
                    error <= std::max({tol.absolute, tol.relative * std::abs(v), floor});
    return out;
}

}  // namespace bianiso::quad
