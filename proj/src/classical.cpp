#include "qscat/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qscat/time_delay.hpp"

namespace qscat {

namespace {

// Profile and its derivative on the normalized coordinate u = s/b in [0, 1].
double profile_h(TransitionProfile p, double u) {
    switch (p) {
        case TransitionProfile::linear: return 1.0 - u;
        case TransitionProfile::smoothstep3: return 1.0 - u * u * (3.0 - 2.0 * u);
        case TransitionProfile::smoothstep5:
            return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        case TransitionProfile::cosine: return 0.5 * (1.0 + std::cos(M_PI * u));
    }
    return 0.0;
}

double profile_dh(TransitionProfile p, double u) {
    switch (p) {
        case TransitionProfile::linear: return -1.0;
        case TransitionProfile::smoothstep3: return -6.0 * u * (1.0 - u);
        case TransitionProfile::smoothstep5: {
            const double w = u * (1.0 - u);
            return -30.0 * w * w;
        }
        case TransitionProfile::cosine: return -0.5 * M_PI * std::sin(M_PI * u);
    }
    return 0.0;
}

// Solve h(u) = y on [0, 1] (h monotone non-increasing). Bisection bracket
// followed by Newton polish; the polish matters near the flat junctions of
// the smooth profiles, where the quadrature below needs the slope at full
// relative accuracy.
double invert_h(TransitionProfile p, double y) {
    y = std::clamp(y, 0.0, 1.0);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 48; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (profile_h(p, mid) > y)
            lo = mid;
        else
            hi = mid;
    }
    double u = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double d = profile_dh(p, u);
        if (d == 0.0) break;
        u -= (profile_h(p, u) - y) / d;
        u = std::clamp(u, 0.0, 1.0);
    }
    return u;
}

} // namespace

double classical_speed(const BarrierSpec& spec, double E, double s, const UnitSystem& units) {
    spec.validate();
    units.validate();
    if (!(E > 0.0)) throw domain_error("classical_speed: E must be > 0");
    if (spec.b <= 0.0) throw domain_error("classical_speed: no transition region (b = 0)");
    if (s < -spec.b || s > 0.0)
        throw domain_error("classical_speed: s outside the entry ramp [-b, 0]");
    const double kinetic = E - spec.v0 * profile_value(spec.profile, -s, spec.b);
    if (kinetic < 0.0)
        throw domain_error("classical_speed: s beyond the turning point (forbidden region)");
    return std::sqrt(2.0 * kinetic / units.mass);
}

ClassicalDelayResult classical_reflection_delay(const BarrierSpec& spec, double E,
                                                const UnitSystem& units, double abs_tol) {
    spec.validate();
    units.validate();
    if (!(E > 0.0)) throw domain_error("classical_reflection_delay: E must be > 0");
    if (E >= spec.v0)
        throw domain_error("classical_reflection_delay: E >= V0, particle is not reflected");

    const double v = units.velocity(E);
    ClassicalDelayResult res;
    res.E = E;
    res.plateau_term = -2.0 * spec.a / v;

    if (spec.b == 0.0) {
        res.s0 = 0.0;
        res.transition_term = 0.0;
    } else {
        res.s0 = turning_point(spec, E);

        // J = int_{s0}^{b} ds / v(s) recast on the kinetic-energy variable
        // g = E - V0 h(s/b), dg = -V0 h'(u) ds / b:
        //   J = int_0^E sqrt(m / 2g) * b dg / (V0 |h'(u(g))|).
        // The turning point sits at the exact endpoint g = 0, so the
        // inverse-square-root singularity (and the junction singularity of
        // the smooth profiles at g = E) is entirely tanh-sinh's problem; no
        // rounded turning point enters the integral.
        boost::math::quadrature::tanh_sinh<double> quad;
        const auto integrand = [&](double g) {
            const double y = (E - g) / spec.v0; // = h(u), in (0, E/V0)
            const double u = invert_h(spec.profile, y);
            const double slope = std::abs(profile_dh(spec.profile, u));
            if (slope == 0.0) return 0.0; // only reachable at zero-weight endpoints
            return std::sqrt(units.mass / (2.0 * g)) * spec.b / (spec.v0 * slope);
        };
        const double J = quad.integrate(integrand, 0.0, E, abs_tol);
        res.transition_term = 2.0 * J - 2.0 * spec.b / v;
    }
    res.tau_cl = res.transition_term + res.plateau_term;
    return res;
}

SemiclassicalComparison semiclassical_comparison(const BarrierSpec& spec, double E,
                                                 const UnitSystem& units) {
    SemiclassicalComparison cmp;
    const auto cl = classical_reflection_delay(spec, E, units);
    cmp.tau_classical = cl.tau_cl;
    const auto set = delays_for_barrier(spec, E, units);
    if (!set.tau_left)
        throw domain_error("semiclassical_comparison: reflection phase undefined");
    cmp.tau_quantum = *set.tau_left;
    if (spec.b <= 0.0) {
        cmp.in_semiclassical_scope = false; // lambda << b unsatisfiable
        cmp.lambda_over_b = std::numeric_limits<double>::infinity();
    } else {
        cmp.lambda_over_b = units.de_broglie(E) / spec.b;
    }
    return cmp;
}

} // namespace qscat
