#ifndef QSCAT_REFERENCE_HPP
#define QSCAT_REFERENCE_HPP

#include "qscat/scattering.hpp"
#include "qscat/units.hpp"

namespace qscat {

// Closed-form reference results used to validate the numerical pipelines.
// Nothing in this header is used by the solvers themselves; the `verify`
// subcommand and the test suites compare against these expressions.

/// Rectangular barrier of height v0 on [-a, a] (b = 0), any E > 0, E != 0.
/// Amplitudes in the same x = 0 referenced plane-wave basis as the solver:
///   T = e^{-ikw} / D,  L = R = i ((q^2-k^2)/(2kq)) sin(qw) e^{-ikw} / D,
///   D = cos(qw) - i ((k^2+q^2)/(2kq)) sin(qw),  w = 2a,
/// with q = sqrt(2m(E-v0))/hbar continued to i kappa below the barrier.
ScatteringAmplitudes rectangular_amplitudes(double v0, double a, double E,
                                            const UnitSystem& units = {});

/// Analytic transmission time-delay hbar d(arg T)/dE of the rectangular
/// barrier for 0 < E < v0 (tunneling branch):
///   arg T = -k w - atan(((kappa^2-k^2)/(2 k kappa)) tanh(kappa w)).
double rectangular_transmission_delay_tunneling(double v0, double a, double E,
                                                const UnitSystem& units = {});

/// Numerically differentiated closed-form delay, valid at any E > 0 not too
/// close to v0. Five-point stencil with step rel_step * E on the closed-form
/// phases; used to cross-check the analytic branch and for E > v0.
double rectangular_transmission_delay_numeric(double v0, double a, double E,
                                              const UnitSystem& units = {},
                                              double rel_step = 1e-6);

/// Same numeric differentiation for the reflection phase arg L.
double rectangular_reflection_delay_numeric(double v0, double a, double E,
                                            const UnitSystem& units = {},
                                            double rel_step = 1e-6);

/// Opaque-barrier limit of the dwell time tau_tr + 2a_total/v for b = 0:
///   T_sat = 2 m / (hbar k kappa).
double rectangular_dwell_saturation(double v0, double E, const UnitSystem& units = {});

/// Hand-integrated transition term of the classical reflection delay for the
/// linear ramp: 2 b (2E - V0) / (v V0).
double linear_ramp_transition_term(double v0, double b, double E,
                                   const UnitSystem& units = {});

} // namespace qscat

#endif
