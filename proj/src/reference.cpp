#include "qscat/reference.hpp"

#include <cmath>
#include <vector>

#include "deriv.hpp"

namespace qscat {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

} // namespace

ScatteringAmplitudes rectangular_amplitudes(double v0, double a, double E,
                                            const UnitSystem& units) {
    if (!(E > 0.0)) throw domain_error("rectangular_amplitudes: E must be > 0");
    if (!(a > 0.0)) throw domain_error("rectangular_amplitudes: a must be > 0");
    units.validate();

    const double w = 2.0 * a;
    const double k = units.wavenumber(E);
    const cd q = std::sqrt(cd(2.0 * units.mass * (E - v0), 0.0)) / units.hbar;
    const cd sigma = (k * k + q * q) / (2.0 * k * q);
    const cd rho = (q * q - k * k) / (2.0 * k * q);
    const cd D = std::cos(q * w) - I * sigma * std::sin(q * w);
    const cd phase = std::exp(-I * cd(k * w));

    ScatteringAmplitudes amps;
    amps.E = E;
    amps.T = phase / D;
    amps.L = I * rho * std::sin(q * w) * phase / D;
    amps.R = amps.L; // symmetric barrier
    return amps;
}

double rectangular_transmission_delay_tunneling(double v0, double a, double E,
                                                const UnitSystem& units) {
    if (!(E > 0.0 && E < v0))
        throw domain_error("rectangular_transmission_delay_tunneling: needs 0 < E < v0");
    const double hbar = units.hbar, m = units.mass;
    const double w = 2.0 * a;
    const double k = units.wavenumber(E);
    const double kappa = std::sqrt(2.0 * m * (v0 - E)) / hbar;

    // arg T = -k w - atan(f tanh(kappa w)),  f = (kappa^2 - k^2) / (2 k kappa)
    const double f = (kappa * kappa - k * k) / (2.0 * k * kappa);
    const double th = std::tanh(kappa * w);
    const double dk = m / (hbar * hbar * k);
    const double dkappa = -m / (hbar * hbar * kappa);
    const double s2 = kappa * kappa + k * k;
    const double fprime = -0.5 * m * s2 * s2 / (hbar * hbar * k * k * k * kappa * kappa * kappa);
    const double sech = 1.0 / std::cosh(kappa * w);
    const double uprime = fprime * th + f * w * sech * sech * dkappa;
    const double u = f * th;
    return units.hbar * (-dk * w - uprime / (1.0 + u * u));
}

namespace {

double reference_phase_delay(double v0, double a, double E, const UnitSystem& units,
                             double rel_step, bool reflection) {
    if (!(E > 0.0)) throw domain_error("reference delay: E must be > 0");
    const double h = E * rel_step;
    std::vector<double> es, phases;
    double prev = 0.0;
    for (int i = -2; i <= 2; ++i) {
        const double e = E + i * h;
        const auto amps = rectangular_amplitudes(v0, a, e, units);
        double ph = std::arg(reflection ? amps.L : amps.T);
        if (!es.empty()) ph = phases.back() + std::remainder(ph - prev, 2.0 * M_PI);
        prev = std::arg(reflection ? amps.L : amps.T);
        es.push_back(e);
        phases.push_back(ph);
    }
    return units.hbar * detail::lagrange_derivative(es, phases, E);
}

} // namespace

double rectangular_transmission_delay_numeric(double v0, double a, double E,
                                              const UnitSystem& units, double rel_step) {
    return reference_phase_delay(v0, a, E, units, rel_step, false);
}

double rectangular_reflection_delay_numeric(double v0, double a, double E,
                                            const UnitSystem& units, double rel_step) {
    return reference_phase_delay(v0, a, E, units, rel_step, true);
}

double rectangular_dwell_saturation(double v0, double E, const UnitSystem& units) {
    if (!(E > 0.0 && E < v0))
        throw domain_error("rectangular_dwell_saturation: needs 0 < E < v0");
    const double k = units.wavenumber(E);
    const double kappa = std::sqrt(2.0 * units.mass * (v0 - E)) / units.hbar;
    return 2.0 * units.mass / (units.hbar * k * kappa);
}

double linear_ramp_transition_term(double v0, double b, double E, const UnitSystem& units) {
    if (!(E > 0.0 && E < v0))
        throw domain_error("linear_ramp_transition_term: needs 0 < E < v0");
    const double v = units.velocity(E);
    return 2.0 * b * (2.0 * E - v0) / (v * v0);
}

} // namespace qscat
