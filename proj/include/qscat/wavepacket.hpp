#ifndef QSCAT_WAVEPACKET_HPP
#define QSCAT_WAVEPACKET_HPP

#include <complex>
#include <utility>
#include <vector>

#include "qscat/potential.hpp"
#include "qscat/units.hpp"

namespace qscat {

/// Incoming Gaussian packet. sigma is the spatial width (std of |psi|^2);
/// the wavenumber spread is 1/(2 sigma).
struct WavePacketSpec {
    double x0 = 0.0;
    double k0 = 0.0;
    double sigma = 1.0;

    void validate() const;
};

/// Periodic spatial grid for split-operator propagation. n_points must be a
/// power of two. FFT wavenumber ordering: k(j) = 2 pi j' / (n dx) with
/// j' = j for j < n/2 and j - n otherwise.
struct SimulationGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_points = 0;
    double dt = 0.0;
    double t_max = 0.0;

    double dx() const { return (x_max - x_min) / n_points; }
    double x(int j) const { return x_min + j * dx(); }
    double k(int j) const;

    void validate() const;
};

struct WavePacket {
    std::vector<std::complex<double>> psi;
    double t = 0.0;

    double norm(const SimulationGrid& grid) const;
    double centroid(const SimulationGrid& grid) const;
    double width(const SimulationGrid& grid) const;
    double mean_wavenumber(const SimulationGrid& grid) const; // from the momentum image
};

/// Unit-norm Gaussian on the grid. Raises domain_error if the packet
/// overlaps the barrier support (mass right of -(a+b) above 1e-12), carries
/// negative-momentum mass above 1e-10, or the grid cannot resolve k0 + 6/sigma.
WavePacket initialize_gaussian(const WavePacketSpec& packet, const SimulationGrid& grid,
                               const BarrierSpec& barrier, const UnitSystem& units = {});

/// P(|x| <= R) series sampled along a run, for the interacting state and for
/// the free reference evolved from the same initial data.
struct RegionSeries {
    double R = 0.0;
    std::vector<double> p_interacting;
    std::vector<double> p_free;
};

struct EvolveOptions {
    int sample_stride = 0;             // observable sampling period in steps; 0 = auto
    std::vector<double> monitor_radii; // radii tracked for sojourn times
    bool with_free_reference = true;   // also sample the free run (exact spectral propagation)
};

/// Time-ordered observables of one run plus its endpoint states.
///
/// Region probabilities, the wrap-around guard and branch moments read the
/// band-limited state (|k| <= k_guard = k0 + 10/sigma, covering the full
/// occupied spectrum). Strang splitting pumps a small high-k residue through
/// aliasing resonances at k = sqrt(4 pi j m / (hbar dt)); that residue is
/// outside every physical band and is tracked in max_out_of_band instead of
/// polluting presence probabilities. It vanishes when dt < 4 m dx^2 / (pi
/// hbar), which pushes the first resonance past the grid Nyquist mode.
struct Trajectory {
    SimulationGrid grid;
    BarrierSpec barrier;
    UnitSystem units;
    WavePacketSpec packet;
    WavePacket initial;
    WavePacket final_state;
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> centroids;
    std::vector<RegionSeries> regions;
    double k_guard = 0.0;
    double max_boundary_mass = 0.0;  // band-limited mass in the edge buffers
    double max_out_of_band = 0.0;    // splitting residue beyond k_guard
    int steps = 0;
};

/// Strang-split propagation exp(-iV dt/2) exp(-iK dt) exp(-iV dt/2) with
/// spectral kinetic steps. Each factor is a unit-modulus multiplier, so the
/// norm is conserved to rounding; drift beyond 1e-8 raises numerical_error,
/// as does boundary wrap-around mass beyond 1e-8.
Trajectory evolve(const WavePacket& packet, const WavePacketSpec& packet_spec,
                  const BarrierSpec& barrier, const SimulationGrid& grid,
                  const UnitSystem& units = {}, EvolveOptions options = {});

/// Time-quadrature of the presence probability inside [-R, R] (Simpson over
/// the sampled series) and the free-reference counterpart.
struct SojournRecord {
    double R = 0.0;
    double T_interacting = 0.0;
    double T_free = 0.0;
    double truncation_estimate = 0.0;
    std::vector<std::pair<double, double>> samples; // (t, P_R interacting)
};

/// R must be one of the monitored radii of the trajectory. Raises
/// domain_error if P_R(t_max) has not decayed below 1e-8.
SojournRecord sojourn_time(const Trajectory& traj, double R);

enum class Outcome { transmitted, reflected };

struct OutcomeProbabilities {
    double p_tr = 0.0;
    double p_re = 0.0;
};

struct SplitResult {
    WavePacket transmitted; // positive-momentum projection
    WavePacket reflected;   // negative-momentum projection (k = 0 bin included)
    OutcomeProbabilities probs;
};

/// Momentum-sign projection of a post-collision state. Raises domain_error
/// while interaction-region mass is still above 1e-8 (premature split).
/// A positive k_guard evaluates that precondition on the spectrally windowed
/// state (see Trajectory), so the splitting residue of long runs does not
/// mask a completed collision; the projection itself always covers the full
/// spectrum.
SplitResult split_outcomes(const WavePacket& state, const SimulationGrid& grid,
                           const BarrierSpec& barrier, double k_guard = 0.0);

/// Amplitude-weighted average of on-shell delays over the packet spectrum,
///   tau = sum |phi(k)|^2 |A(E_k)|^2 tau_A(E_k) / sum |phi(k)|^2 |A(E_k)|^2,
/// evaluated on a uniform wavenumber window k0 +- 6 sigma_k with spacing
/// sigma_k = 1/(2 sigma) (trapezoid weights; the E<->k Jacobians cancel in
/// the ratio). probability is the matching outcome probability.
struct SpectralDelay {
    double tau = 0.0;
    double probability = 0.0;
    double derivative_error = 0.0; // weight-averaged stencil error estimate
};

SpectralDelay spectral_conditional_delay(const BarrierSpec& barrier,
                                         const WavePacketSpec& packet, Outcome which,
                                         const UnitSystem& units = {});

/// Crossing time of the branch centroid at the reference plane minus the
/// free-reference crossing time. The branch trajectory is extrapolated
/// linearly from the final state with its own mean velocity (exact for free
/// motion); the free reference moves at hbar k0 / m from x0, mirrored for the
/// reflected branch. Raises domain_error if the branch probability is below
/// 1e-6 or the centroid has not crossed the plane by t_max.
double centroid_delay_estimate(const Trajectory& traj, Outcome which, double plane);

} // namespace qscat

#endif
