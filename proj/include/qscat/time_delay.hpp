#ifndef QSCAT_TIME_DELAY_HPP
#define QSCAT_TIME_DELAY_HPP

#include <functional>
#include <optional>
#include <vector>

#include "qscat/scattering.hpp"

namespace qscat {

/// Unwrapped amplitude phases over an energy grid. Entries are NaN where the
/// corresponding amplitude is missing or too small to carry a phase.
struct PhaseCurve {
    EnergyGrid grid;
    std::vector<double> alpha_T;
    std::vector<double> alpha_L;
    std::vector<double> alpha_R;
};

/// Continuity-unwrap the amplitude phases of a sweep. The grid must be dense
/// enough that the true phase change between neighbours stays below pi;
/// a residual jump >= pi raises numerical_error.
PhaseCurve unwrap_phases(const std::vector<ScatteringAmplitudes>& amps);

/// Phase-derivative delays tau = hbar d(alpha)/dE at one energy.
/// Members are absent where the phase itself is undefined (e.g. L = 0 for the
/// null barrier). derivative_error_estimate is the Richardson residual of the
/// stencil, plus a rounding floor.
struct TimeDelaySet {
    double E = 0.0;
    std::optional<double> tau_tr;
    std::optional<double> tau_left;
    std::optional<double> tau_right;
    double derivative_error_estimate = 0.0;
    unsigned flags = 0;
};

/// Differentiate the curve at an interior energy. Uses the five nearest nodes
/// (degree-4 Lagrange derivative, which on a uniform grid equals the
/// Richardson-extrapolated central difference); the error estimate is the
/// difference against the three-node derivative. Near a grid edge the stencil
/// becomes one-sided and the edge_derivative flag is set.
TimeDelaySet delays_at(const PhaseCurve& curve, double E, const UnitSystem& units = {});

/// tau_tr - (tau_left + tau_right)/2; absent if any member delay is absent.
std::optional<double> verify_delay_identity(const TimeDelaySet& set);

using AmplitudeFn = std::function<ScatteringAmplitudes(double)>;

/// Delays from a five-point dedicated stencil E (1 +- {0,1,2} rel_step)
/// around the requested energy. Default rel_step = 1e-3.
TimeDelaySet delays_for(const AmplitudeFn& amplitudes, double E, const UnitSystem& units = {},
                        double rel_step = 1e-3);

/// Convenience wrapper binding the slice solver at default discretization.
TimeDelaySet delays_for_barrier(const BarrierSpec& spec, double E, const UnitSystem& units = {});

/// One point of a barrier-width sweep at fixed energy. dwell and v_eff are
/// derived from tau_tr by construction:
///   dwell = tau_tr + 2 (a+b) / v,   v_eff = 2 (a+b) / dwell.
struct HartmanRow {
    double a = 0.0;
    double tau_tr = 0.0;
    double dwell = 0.0;
    double v_eff = 0.0;
    double v = 0.0;
    double abs_T2 = 0.0;
    double derivative_error_estimate = 0.0;
    unsigned flags = 0;
};

/// Recompute amplitudes and delays for each half-width a in a_values
/// (0 < E < V0, a_values strictly increasing). Rows whose transmission
/// amplitude underflows are flagged, never fabricated.
std::vector<HartmanRow> hartman_sweep(const BarrierSpec& templ, double E,
                                      const std::vector<double>& a_values,
                                      const UnitSystem& units = {});

} // namespace qscat

#endif
