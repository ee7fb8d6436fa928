#ifndef QSCAT_SCATTERING_HPP
#define QSCAT_SCATTERING_HPP

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qscat/potential.hpp"
#include "qscat/units.hpp"

namespace qscat {

// Result flags. A flagged entry is never silently fabricated; callers decide.
namespace flag {
constexpr unsigned domain_error = 1u << 0;      // input outside the physical domain
constexpr unsigned accuracy_warning = 1u << 1;  // slicing not self-converged
constexpr unsigned underflow = 1u << 2;         // amplitude below representable range
constexpr unsigned edge_derivative = 1u << 3;   // one-sided stencil at a grid edge
constexpr unsigned missing_phase = 1u << 4;     // amplitude too small for a phase
constexpr unsigned unresolved_phase = 1u << 5;  // phase varies too fast for the grid
} // namespace flag

/// On-shell amplitudes at energy E in the plane-wave basis exp(+-ikx),
/// k = sqrt(2mE)/hbar, phases referenced to x = 0:
///   left incidence   psi = e^{ikx} + L e^{-ikx}   (x left of support)
///                    psi = T e^{ikx}              (x right of support)
///   right incidence  psi = e^{-ikx} + R e^{ikx}   (x right of support)
///                    psi = T e^{-ikx}             (x left of support)
/// The on-shell scattering matrix is [[T, R], [L, T]].
struct ScatteringAmplitudes {
    double E = 0.0;
    std::complex<double> T{0.0, 0.0};
    std::complex<double> L{0.0, 0.0};
    std::complex<double> R{0.0, 0.0};
    unsigned flags = 0;

    bool ok() const { return (flags & flag::domain_error) == 0; }
    double transmission_probability() const { return std::norm(T); }

    // max of | |T|^2+|L|^2-1 |, | |T|^2+|R|^2-1 |, | |L|-|R| |
    double unitarity_residual() const;
};

/// Piecewise-constant segment of the sliced potential.
struct Slice {
    double v = 0.0;     // potential value on the segment
    double width = 0.0; // segment length
};

/// Slicing of the support [x_min, x_max] = [-(a+b), a+b]. Each transition
/// region is cut into n_per_transition equal slices sampled at midpoints;
/// the plateau [-a, a] is kept as a single exact segment.
struct SliceDiscretization {
    int n_per_transition = 64;
    double x_min = 0.0;
    double x_max = 0.0;

    void validate() const;
};

/// Slice width <= min(lambda/20, b/64), i.e. n = max(64, ceil(20 b / lambda)).
SliceDiscretization default_discretization(const BarrierSpec& spec, double E,
                                           const UnitSystem& units = {});

std::vector<Slice> build_slices(const BarrierSpec& spec, const SliceDiscretization& disc);

/// Strictly increasing positive energies.
struct EnergyGrid {
    std::vector<double> energies;

    void validate() const;
    std::size_t size() const { return energies.size(); }
};

EnergyGrid linspace_grid(double e_min, double e_max, int n);

/// Full on-shell scattering matrix of the barrier at energy E (E > 0).
/// Composed slice by slice with scattering-matrix (Redheffer) products, so
/// every factor stays bounded for arbitrarily opaque barriers. When
/// check_convergence is set and the barrier has ramps, the result is
/// recomputed at half slicing and flagged with accuracy_warning if the two
/// disagree beyond 1e-6.
ScatteringAmplitudes scattering_matrix(const BarrierSpec& spec, double E,
                                       const UnitSystem& units = {},
                                       std::optional<SliceDiscretization> disc = std::nullopt,
                                       bool check_convergence = true);

/// Same composition for an arbitrary piecewise-constant potential occupying
/// [x_left, x_left + sum(widths)]. This is the entry point used for
/// non-symmetric test potentials.
ScatteringAmplitudes scattering_matrix_sliced(std::span<const Slice> slices, double x_left,
                                              double E, const UnitSystem& units = {});

/// One ScatteringAmplitudes per grid energy, order preserved. Per-energy
/// domain errors are flagged on the affected entry instead of aborting.
std::vector<ScatteringAmplitudes> amplitude_over_grid(const BarrierSpec& spec,
                                                      const EnergyGrid& grid,
                                                      const UnitSystem& units = {},
                                                      std::optional<SliceDiscretization> disc = std::nullopt,
                                                      int threads = 1);

/// Residual of arg T + pi/2 - (arg L + arg R)/2, reduced mod pi into
/// (-pi/2, pi/2]. Unitarity forces it to vanish. Raises domain_error when
/// any amplitude modulus is below 1e-280 (phase undefined).
double check_phase_relation(const ScatteringAmplitudes& amps);

/// |T|^2 as a function of the per-transition slice count.
std::vector<std::pair<int, double>> convergence_study(const BarrierSpec& spec, double E,
                                                      const UnitSystem& units,
                                                      const std::vector<int>& n_list);

} // namespace qscat

#endif
