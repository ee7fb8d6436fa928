#ifndef QSCAT_CLASSICAL_HPP
#define QSCAT_CLASSICAL_HPP

#include "qscat/potential.hpp"
#include "qscat/units.hpp"

namespace qscat {

/// Classical reflection time-delay of a particle with 0 < E < V0, split into
/// the two contributions
///   transition_term = 2 * integral_{-b}^{-s0} ds / v(s) - 2 b / v
///   plateau_term    = -2 a / v
/// with v(s) = sqrt(2 [E - V0 h(-s)] / m). tau_cl is their sum, stored so the
/// decomposition is exact by construction.
struct ClassicalDelayResult {
    double E = 0.0;
    double tau_cl = 0.0;
    double transition_term = 0.0;
    double plateau_term = 0.0;
    double s0 = 0.0;
};

/// Local classical speed v(s) inside the entry ramp, -b <= s <= -s0.
/// s beyond the turning point raises domain_error (forbidden region).
double classical_speed(const BarrierSpec& spec, double E, double s,
                       const UnitSystem& units = {});

/// Turning-point quadrature of the delay. The integrand has an integrable
/// inverse-square-root singularity at s = -s0; it is evaluated with
/// double-exponential (tanh-sinh) quadrature to abs_tol (default 1e-10).
/// E >= V0 raises domain_error (no classical reflection), as does E <= 0.
ClassicalDelayResult classical_reflection_delay(const BarrierSpec& spec, double E,
                                                const UnitSystem& units = {},
                                                double abs_tol = 1e-10);

/// Quantum reflection delay vs the classical one for the same barrier and
/// energy, with the ratio lambda / b that controls the semiclassical regime.
struct SemiclassicalComparison {
    double tau_quantum = 0.0;
    double tau_classical = 0.0;
    double lambda_over_b = 0.0;
    bool in_semiclassical_scope = true; // false for b = 0 (lambda << b unsatisfiable)
};

SemiclassicalComparison semiclassical_comparison(const BarrierSpec& spec, double E,
                                                 const UnitSystem& units = {});

} // namespace qscat

#endif
