#ifndef QSCAT_SRC_DERIV_HPP
#define QSCAT_SRC_DERIV_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace qscat::detail {

// First derivative of the Lagrange interpolant through (x[i], y[i]) at xt.
// Works whether or not xt coincides with a node. For a uniform five-node
// window centred on xt this reproduces the Richardson-extrapolated central
// difference (4 D_h - D_2h) / 3.
inline double lagrange_derivative(std::span<const double> x, std::span<const double> y,
                                  double xt) {
    const std::size_t m = x.size();
    assert(y.size() == m && m >= 2);
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double denom = 1.0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) denom *= (x[i] - x[j]);
        double num = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            double p = 1.0;
            for (std::size_t l = 0; l < m; ++l)
                if (l != i && l != j) p *= (xt - x[l]);
            num += p;
        }
        d += y[i] * num / denom;
    }
    return d;
}

struct DerivEstimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double error = std::numeric_limits<double>::infinity();
};

// Derivative at xt from a window of up to five nodes, with an error estimate
// taken as the difference between the full-window derivative and the one from
// the three nodes nearest xt, plus a rounding floor eps |y| / h_min.
inline DerivEstimate derivative_with_estimate(std::span<const double> x,
                                              std::span<const double> y, double xt) {
    const std::size_t m = x.size();
    if (m < 2) return {};
    const double d_full = lagrange_derivative(x, y, xt);

    // nearest-3 subwindow (nodes are sorted)
    std::size_t c = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (std::abs(x[i] - xt) < std::abs(x[c] - xt)) c = i;
    std::size_t lo = c > 0 ? c - 1 : 0;
    if (lo + 3 > m) lo = m - std::min<std::size_t>(3, m);
    const std::size_t n3 = std::min<std::size_t>(3, m);
    const double d_3 = lagrange_derivative(x.subspan(lo, n3), y.subspan(lo, n3), xt);

    double ymax = 0.0, hmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) ymax = std::max(ymax, std::abs(y[i]));
    for (std::size_t i = 1; i < m; ++i) hmin = std::min(hmin, x[i] - x[i - 1]);
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * ymax / hmin;

    return {d_full, std::abs(d_full - d_3) + floor};
}

} // namespace qscat::detail

#endif
