#include "qscat/time_delay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deriv.hpp"

namespace qscat {

namespace {

constexpr double kPhaseFloor = 1e-280;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> unwrap_series(const std::vector<ScatteringAmplitudes>& amps,
                                  std::complex<double> ScatteringAmplitudes::*member) {
    std::vector<double> out(amps.size(), kNaN);
    bool have_prev = false;
    double prev_raw = 0.0, prev_unwrapped = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (!amps[i].ok() || std::abs(amps[i].*member) < kPhaseFloor) continue;
        const double raw = std::arg(amps[i].*member);
        if (!have_prev) {
            out[i] = raw;
        } else {
            const double jump = std::remainder(raw - prev_raw, 2.0 * M_PI);
            if (std::abs(jump) >= M_PI * (1.0 - 1e-12))
                throw numerical_error("unwrap_phases: phase step >= pi, grid too coarse");
            out[i] = prev_unwrapped + jump;
        }
        prev_raw = raw;
        prev_unwrapped = out[i];
        have_prev = true;
    }
    return out;
}

struct Windowed {
    std::vector<double> x, y;
    bool clamped = false;
};

// Up to five nodes around E with finite phase values.
Windowed window_around(const EnergyGrid& grid, const std::vector<double>& phase, double E) {
    const auto& es = grid.energies;
    const std::size_t n = es.size();
    Windowed w;
    if (n == 0) return w;
    std::size_t c = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(es[i] - E) < std::abs(es[c] - E)) c = i;
    std::size_t lo = c >= 2 ? c - 2 : 0;
    std::size_t hi = std::min(lo + 5, n);
    if (hi - lo < 5 && hi == n) lo = n >= 5 ? n - 5 : 0;
    w.clamped = (c < 2 || c + 2 >= n);
    for (std::size_t i = lo; i < hi; ++i) {
        if (!std::isfinite(phase[i])) return {}; // stencil broken by a missing phase
        w.x.push_back(es[i]);
        w.y.push_back(phase[i]);
    }
    return w;
}

} // namespace

PhaseCurve unwrap_phases(const std::vector<ScatteringAmplitudes>& amps) {
    PhaseCurve curve;
    curve.grid.energies.reserve(amps.size());
    for (const auto& a : amps) curve.grid.energies.push_back(a.E);
    curve.alpha_T = unwrap_series(amps, &ScatteringAmplitudes::T);
    curve.alpha_L = unwrap_series(amps, &ScatteringAmplitudes::L);
    curve.alpha_R = unwrap_series(amps, &ScatteringAmplitudes::R);
    return curve;
}

TimeDelaySet delays_at(const PhaseCurve& curve, double E, const UnitSystem& units) {
    units.validate();
    TimeDelaySet set;
    set.E = E;
    double err = 0.0;
    bool clamped = false;
    bool unresolved = false;

    auto eval = [&](const std::vector<double>& phase) -> std::optional<double> {
        const auto w = window_around(curve.grid, phase, E);
        if (w.x.size() < 2) return std::nullopt;
        clamped = clamped || w.clamped;
        // a phase step beyond pi/2 per node cannot be told apart from an
        // aliased branch jump (e.g. across a reflection zero)
        for (std::size_t i = 1; i < w.y.size(); ++i)
            if (std::abs(w.y[i] - w.y[i - 1]) > M_PI / 2.0) unresolved = true;
        const auto d = detail::derivative_with_estimate(w.x, w.y, E);
        if (!std::isfinite(d.value)) return std::nullopt;
        err = std::max(err, units.hbar * d.error);
        return units.hbar * d.value;
    };

    set.tau_tr = eval(curve.alpha_T);
    set.tau_left = eval(curve.alpha_L);
    set.tau_right = eval(curve.alpha_R);
    set.derivative_error_estimate = err;
    if (clamped) set.flags |= flag::edge_derivative;
    if (unresolved) set.flags |= flag::unresolved_phase;
    if (!set.tau_left || !set.tau_right || !set.tau_tr) set.flags |= flag::missing_phase;
    return set;
}

std::optional<double> verify_delay_identity(const TimeDelaySet& set) {
    if (!set.tau_tr || !set.tau_left || !set.tau_right) return std::nullopt;
    return *set.tau_tr - 0.5 * (*set.tau_left + *set.tau_right);
}

TimeDelaySet delays_for(const AmplitudeFn& amplitudes, double E, const UnitSystem& units,
                        double rel_step) {
    if (!(E > 0.0)) throw domain_error("delays_for: E must be > 0");
    // Shrink the stencil until the phase change per node is resolved; near a
    // reflection zero the phases vary on an arbitrarily small energy scale.
    for (;;) {
        const double h = E * rel_step;
        std::vector<ScatteringAmplitudes> amps;
        amps.reserve(5);
        for (int i = -2; i <= 2; ++i) amps.push_back(amplitudes(E + i * h));
        const bool can_refine = rel_step > 1e-11;
        try {
            const PhaseCurve curve = unwrap_phases(amps);
            TimeDelaySet set = delays_at(curve, E, units);
            set.flags &= ~flag::edge_derivative; // stencil is centred by construction
            if ((set.flags & flag::unresolved_phase) && can_refine) {
                rel_step *= 0.25;
                continue;
            }
            return set;
        } catch (const numerical_error&) {
            if (!can_refine) throw;
            rel_step *= 0.25;
        }
    }
}

TimeDelaySet delays_for_barrier(const BarrierSpec& spec, double E, const UnitSystem& units) {
    return delays_for(
        [&](double e) { return scattering_matrix(spec, e, units); }, E, units);
}

std::vector<HartmanRow> hartman_sweep(const BarrierSpec& templ, double E,
                                      const std::vector<double>& a_values,
                                      const UnitSystem& units) {
    templ.validate();
    if (!(E > 0.0) || !(E < templ.v0))
        throw domain_error("hartman_sweep: requires 0 < E < V0 (tunneling regime)");
    double prev = 0.0;
    for (double a : a_values) {
        if (!(a > prev)) throw config_error("hartman_sweep: a_values must be increasing and > 0");
        prev = a;
    }

    const double v = units.velocity(E);
    std::vector<HartmanRow> rows;
    rows.reserve(a_values.size());
    for (double a : a_values) {
        BarrierSpec spec = templ;
        spec.a = a;
        HartmanRow row;
        row.a = a;
        row.v = v;

        const auto center = scattering_matrix(spec, E, units);
        row.abs_T2 = std::norm(center.T);
        row.flags = center.flags;
        if (center.flags & flag::underflow) {
            row.tau_tr = row.dwell = row.v_eff = kNaN;
            rows.push_back(row);
            continue;
        }

        const TimeDelaySet set = delays_for_barrier(spec, E, units);
        row.derivative_error_estimate = set.derivative_error_estimate;
        if (!set.tau_tr) {
            row.flags |= flag::missing_phase;
            row.tau_tr = row.dwell = row.v_eff = kNaN;
            rows.push_back(row);
            continue;
        }
        row.tau_tr = *set.tau_tr;
        row.dwell = row.tau_tr + 2.0 * (a + spec.b) / v;
        row.v_eff = 2.0 * (a + spec.b) / row.dwell;
        rows.push_back(row);
    }
    return rows;
}

} // namespace qscat
