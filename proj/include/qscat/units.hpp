#ifndef QSCAT_UNITS_HPP
#define QSCAT_UNITS_HPP

#include <cmath>

#include "qscat/errors.hpp"

namespace qscat {

/// Unit system used by every module. Defaults to natural units hbar = m = 1;
/// all formulas carry the constants explicitly so any consistent system works.
struct UnitSystem {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(hbar > 0.0)) throw config_error("units.hbar must be > 0");
        if (!(mass > 0.0)) throw config_error("units.mass must be > 0");
    }

    // k = sqrt(2 m E) / hbar for a free region
    double wavenumber(double energy) const { return std::sqrt(2.0 * mass * energy) / hbar; }

    // E = hbar^2 k^2 / (2 m)
    double energy_of(double k) const { return hbar * hbar * k * k / (2.0 * mass); }

    // v = sqrt(2 E / m)
    double velocity(double energy) const { return std::sqrt(2.0 * energy / mass); }

    // lambda = 2 pi hbar / sqrt(2 m E)
    double de_broglie(double energy) const {
        return 2.0 * M_PI * hbar / std::sqrt(2.0 * mass * energy);
    }
};

} // namespace qscat

#endif
