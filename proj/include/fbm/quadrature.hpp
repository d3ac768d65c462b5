#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fbm {

inline constexpr double kQuadratureTolerance = 1e-12;

/// Adaptive Gauss-Kronrod (7/15) on [a, b], split into panels at every
/// interior knot so that piecewise-smooth integrands are only integrated
/// over smooth pieces. b may be +infinity.
template <class F>
double integrate(F &&f, double a, double b, std::span<const double> knots = {},
                 double tolerance = kQuadratureTolerance) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a};
    for (double k : knots)
        if (k > a && k < b) cuts.push_back(k);
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] > cuts[i])) continue;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], 20,
                                                                               tolerance);
    }
    return total;
}

/// Integer knots strictly inside [a, b]; b may be infinite (then none past a + 64).
inline std::vector<double> integer_knots(double a, double b) {
    std::vector<double> k;
    const double hi = std::isfinite(b) ? b : a + 64.0;
    for (double t = std::floor(a) + 1.0; t < hi; t += 1.0) k.push_back(t);
    return k;
}

} // namespace fbm
