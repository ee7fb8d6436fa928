#include "qscat/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>

#include <fftw3.h>

#include "qscat/scattering.hpp"
#include "qscat/time_delay.hpp"

namespace qscat {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

std::mutex g_fftw_plan_mutex; // FFTW plan creation is not thread safe

// In-place forward/backward transforms; backward carries the 1/n scaling so
// backward(forward(psi)) == psi.
class Fft {
  public:
    explicit Fft(int n) : n_(n) {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        work_.resize(n);
        auto* p = reinterpret_cast<fftw_complex*>(work_.data());
        fwd_ = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    // Transforms run on the planned buffer; callers keep plain vectors.
    void forward(std::vector<cd>& psi) {
        std::memcpy(work_.data(), psi.data(), n_ * sizeof(cd));
        fftw_execute(fwd_);
        std::memcpy(psi.data(), work_.data(), n_ * sizeof(cd));
    }
    void backward(std::vector<cd>& psi) {
        std::memcpy(work_.data(), psi.data(), n_ * sizeof(cd));
        fftw_execute(bwd_);
        const double inv = 1.0 / n_;
        for (int j = 0; j < n_; ++j) psi[j] = work_[j] * inv;
    }

  private:
    int n_;
    std::vector<cd> work_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

double region_mass(const std::vector<cd>& psi, const SimulationGrid& grid, double lo, double hi) {
    const double dx = grid.dx();
    double m = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        if (x >= lo && x <= hi) m += std::norm(psi[j]);
    }
    return m * dx;
}

// Spectral window passing |k| <= k_guard with a cos^2 roll-off to 2 k_guard.
// The smooth edge keeps the x-space leakage of the windowed state polynomially
// small, so windowed position measurements do not ring across the domain.
std::vector<double> band_window(const SimulationGrid& grid, double k_guard) {
    std::vector<double> w(grid.n_points, 0.0);
    for (int j = 0; j < grid.n_points; ++j) {
        const double ak = std::abs(grid.k(j));
        if (ak <= k_guard)
            w[j] = 1.0;
        else if (ak < 2.0 * k_guard) {
            const double c = std::cos(0.5 * M_PI * (ak - k_guard) / k_guard);
            w[j] = c * c;
        }
    }
    return w;
}

// Composite Simpson over uniformly sampled values; trapezoid closing for an
// even sample count.
double integrate_series(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    std::size_t i = 0;
    while (i + 2 < n) {
        s += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        i += 2;
    }
    if (i + 1 < n) s += 0.5 * h * (y[i] + y[i + 1]);
    return s;
}

} // namespace

void WavePacketSpec::validate() const {
    if (!(sigma > 0.0)) throw config_error("packet.sigma must be > 0");
    if (!(k0 > 0.0)) throw config_error("packet.k0 must be > 0 (incoming from the left)");
    if (!std::isfinite(x0)) throw config_error("packet.x0 must be finite");
}

double SimulationGrid::k(int j) const {
    const int half = n_points / 2;
    const int jj = j < half ? j : j - n_points;
    return 2.0 * M_PI * jj / (n_points * dx());
}

void SimulationGrid::validate() const {
    if (n_points < 8 || (n_points & (n_points - 1)) != 0)
        throw config_error("grid.n must be a power of two, >= 8");
    if (!(x_max > x_min)) throw config_error("grid.xmax must exceed grid.xmin");
    if (!(dt > 0.0)) throw config_error("grid.dt must be > 0");
    if (!(t_max > 0.0)) throw config_error("grid.tmax must be > 0");
}

double WavePacket::norm(const SimulationGrid& grid) const {
    double s = 0.0;
    for (const auto& z : psi) s += std::norm(z);
    return s * grid.dx();
}

double WavePacket::centroid(const SimulationGrid& grid) const {
    double s = 0.0, w = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double p = std::norm(psi[j]);
        s += p * grid.x(j);
        w += p;
    }
    return s / w;
}

double WavePacket::width(const SimulationGrid& grid) const {
    const double c = centroid(grid);
    double s = 0.0, w = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double p = std::norm(psi[j]);
        const double d = grid.x(j) - c;
        s += p * d * d;
        w += p;
    }
    return std::sqrt(s / w);
}

double WavePacket::mean_wavenumber(const SimulationGrid& grid) const {
    Fft fft(grid.n_points);
    std::vector<cd> spec = psi;
    fft.forward(spec);
    double s = 0.0, w = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double p = std::norm(spec[j]);
        s += p * grid.k(j);
        w += p;
    }
    return s / w;
}

WavePacket initialize_gaussian(const WavePacketSpec& packet, const SimulationGrid& grid,
                               const BarrierSpec& barrier, const UnitSystem& units) {
    packet.validate();
    grid.validate();
    units.validate();

    const double k_nyquist = M_PI / grid.dx();
    if (k_nyquist < packet.k0 + 6.0 / packet.sigma)
        throw domain_error("initialize_gaussian: grid cannot resolve k0 + 6/sigma");

    WavePacket wp;
    wp.t = 0.0;
    wp.psi.resize(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        const double d = grid.x(j) - packet.x0;
        wp.psi[j] = std::exp(cd(-d * d / (4.0 * packet.sigma * packet.sigma), packet.k0 * grid.x(j)));
    }
    const double n0 = wp.norm(grid);
    const double scale = 1.0 / std::sqrt(n0);
    for (auto& z : wp.psi) z *= scale;

    // Placement invariants: negligible mass on the barrier, negligible
    // negative-momentum content.
    const double overlap = region_mass(wp.psi, grid, -barrier.support_half_width(),
                                       grid.x_max) ;
    if (overlap > 1e-12)
        throw domain_error("initialize_gaussian: packet overlaps the barrier support");

    Fft fft(grid.n_points);
    std::vector<cd> spec = wp.psi;
    fft.forward(spec);
    double neg = 0.0, tot = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double p = std::norm(spec[j]);
        tot += p;
        if (grid.k(j) <= 0.0) neg += p;
    }
    if (neg / tot > 1e-10)
        throw domain_error("initialize_gaussian: negative-momentum mass above 1e-10");

    return wp;
}

Trajectory evolve(const WavePacket& packet, const WavePacketSpec& packet_spec,
                  const BarrierSpec& barrier, const SimulationGrid& grid,
                  const UnitSystem& units, EvolveOptions options) {
    barrier.validate();
    grid.validate();
    units.validate();
    if (static_cast<int>(packet.psi.size()) != grid.n_points)
        throw config_error("evolve: packet size does not match grid");

    // Dynamical phases of the populated modes must be resolved by dt.
    const double k_occ = packet_spec.k0 + 6.0 / packet_spec.sigma;
    const double phase_rate =
        std::max(barrier.v0 / units.hbar, units.hbar * k_occ * k_occ / (2.0 * units.mass));
    if (grid.dt * phase_rate > M_PI / 2.0)
        throw config_error("evolve: dt too large for the populated phase rates");

    const int n = grid.n_points;
    const int steps = static_cast<int>(std::ceil(grid.t_max / grid.dt - 1e-9));
    int stride = options.sample_stride;
    if (stride <= 0) stride = std::max(1, steps / 1024);

    // Cached per-node phase factors.
    std::vector<cd> half_v(n), kinetic(n);
    std::vector<double> kin_phase(n);
    for (int j = 0; j < n; ++j) {
        const double v = evaluate_potential(barrier, grid.x(j));
        half_v[j] = std::exp(-I * v * grid.dt / (2.0 * units.hbar));
        const double k = grid.k(j);
        kin_phase[j] = units.hbar * k * k / (2.0 * units.mass);
        kinetic[j] = std::exp(-I * kin_phase[j] * grid.dt);
    }

    Fft fft(n);
    Trajectory traj;
    traj.grid = grid;
    traj.barrier = barrier;
    traj.units = units;
    traj.packet = packet_spec;
    traj.initial = packet;
    traj.steps = steps;
    // The guard band must hold everything the collision genuinely populates:
    // the packet spectrum plus, for an actual barrier, the evanescent
    // transient, whose spectral width is set by kappa_max = sqrt(2 m V0)/hbar
    // and the support scale.
    traj.k_guard = packet_spec.k0 + 10.0 / packet_spec.sigma;
    if (barrier.v0 > 0.0)
        traj.k_guard += std::sqrt(2.0 * units.mass * barrier.v0) / units.hbar +
                        2.0 * M_PI / (2.0 * barrier.support_half_width());
    // The aliasing residue of the splitting sits at k_res = sqrt(4 pi j m /
    // (hbar dt)); it must stay clear of the windowed band.
    const double k_res = std::sqrt(4.0 * M_PI * units.mass / (units.hbar * grid.dt));
    if (k_res <= 2.0 * traj.k_guard)
        throw config_error("evolve: dt too large to separate the splitting residue "
                           "from the physical band (need sqrt(4 pi m / (hbar dt)) > 2 k_guard)");
    for (double r : options.monitor_radii) traj.regions.push_back({r, {}, {}});

    std::vector<cd> psi = packet.psi;
    std::vector<cd> spec0 = packet.psi; // free reference propagates spectrally
    fft.forward(spec0);
    std::vector<cd> free_buf(n), band_buf(n);
    const std::vector<double> window = band_window(grid, traj.k_guard);

    const double buffer = 0.03 * (grid.x_max - grid.x_min);
    const double norm0 = packet.norm(grid);

    auto sample = [&](double t, const std::vector<cd>& state) {
        traj.times.push_back(t);
        double nrm = 0.0, cen = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p = std::norm(state[j]);
            nrm += p;
            cen += p * grid.x(j);
        }
        nrm *= grid.dx();
        cen = cen * grid.dx() / nrm;
        traj.norms.push_back(nrm);
        traj.centroids.push_back(cen);
        if (std::abs(nrm - norm0) > 1e-8)
            throw numerical_error("evolve: norm drift above 1e-8");

        // windowed copy: the physical packet without splitting residue
        band_buf = state;
        fft.forward(band_buf);
        double out_of_band = 0.0;
        const double w = grid.dx() / n;
        for (int j = 0; j < n; ++j) {
            out_of_band += (1.0 - window[j] * window[j]) * std::norm(band_buf[j]) * w;
            band_buf[j] *= window[j];
        }
        fft.backward(band_buf);
        traj.max_out_of_band = std::max(traj.max_out_of_band, out_of_band);

        const double edge = region_mass(band_buf, grid, grid.x_min, grid.x_min + buffer) +
                            region_mass(band_buf, grid, grid.x_max - buffer, grid.x_max);
        traj.max_boundary_mass = std::max(traj.max_boundary_mass, edge);
        if (traj.max_boundary_mass > 1e-8)
            throw numerical_error("evolve: boundary wrap-around mass above 1e-8, domain too small");

        for (auto& reg : traj.regions)
            reg.p_interacting.push_back(region_mass(band_buf, grid, -reg.R, reg.R));

        if (options.with_free_reference && !traj.regions.empty()) {
            for (int j = 0; j < n; ++j)
                free_buf[j] = spec0[j] * std::exp(-I * kin_phase[j] * t);
            fft.backward(free_buf);
            for (auto& reg : traj.regions)
                reg.p_free.push_back(region_mass(free_buf, grid, -reg.R, reg.R));
        }
    };

    sample(0.0, psi);
    for (int s = 1; s <= steps; ++s) {
        for (int j = 0; j < n; ++j) psi[j] *= half_v[j];
        fft.forward(psi);
        for (int j = 0; j < n; ++j) psi[j] *= kinetic[j];
        fft.backward(psi);
        for (int j = 0; j < n; ++j) psi[j] *= half_v[j];
        if (s % stride == 0 || s == steps) sample(s * grid.dt, psi);
    }

    traj.final_state.psi = std::move(psi);
    traj.final_state.t = steps * grid.dt;
    return traj;
}

SojournRecord sojourn_time(const Trajectory& traj, double R) {
    const RegionSeries* series = nullptr;
    for (const auto& reg : traj.regions)
        if (std::abs(reg.R - R) <= 1e-9 * std::max(1.0, std::abs(R))) series = &reg;
    if (!series)
        throw config_error("sojourn_time: R was not monitored during evolve");
    if (series->p_free.empty())
        throw config_error("sojourn_time: free reference was not recorded");
    if (!(R > traj.barrier.support_half_width()))
        throw domain_error("sojourn_time: R must exceed the barrier support");

    const auto& p = series->p_interacting;
    if (p.back() >= 1e-8)
        throw domain_error("sojourn_time: P_R(t_max) has not decayed below 1e-8");

    // Sampling is uniform except possibly the last interval; integrate the
    // uniform run with Simpson and close with a trapezoid.
    const double h = traj.times[1] - traj.times[0];
    std::size_t m = p.size();
    bool ragged = m >= 2 && std::abs((traj.times[m - 1] - traj.times[m - 2]) - h) > 1e-9 * h;

    SojournRecord rec;
    rec.R = R;
    const std::size_t body = ragged ? m - 1 : m;
    std::vector<double> pin(p.begin(), p.begin() + body);
    std::vector<double> pfr(series->p_free.begin(), series->p_free.begin() + body);
    rec.T_interacting = integrate_series(pin, h);
    rec.T_free = integrate_series(pfr, h);
    if (ragged) {
        const double hl = traj.times[m - 1] - traj.times[m - 2];
        rec.T_interacting += 0.5 * hl * (p[m - 2] + p[m - 1]);
        rec.T_free += 0.5 * hl * (series->p_free[m - 2] + series->p_free[m - 1]);
    }

    // Tail bound from the sampled decay rate; conservative when not decaying.
    const double p_end = p.back();
    double tail = p_end * traj.times.back();
    if (m >= 2 && p[m - 2] > p_end && p_end > 0.0) {
        const double lambda = std::log(p[m - 2] / p_end) / h;
        tail = p_end / lambda;
    }
    rec.truncation_estimate = tail;

    rec.samples.reserve(m);
    for (std::size_t i = 0; i < m; ++i) rec.samples.emplace_back(traj.times[i], p[i]);
    return rec;
}

SplitResult split_outcomes(const WavePacket& state, const SimulationGrid& grid,
                           const BarrierSpec& barrier, double k_guard) {
    Fft fft(grid.n_points);
    std::vector<cd> spec = state.psi;
    fft.forward(spec);

    std::vector<cd> probe = state.psi;
    if (k_guard > 0.0) {
        const auto window = band_window(grid, k_guard);
        probe = spec;
        for (int j = 0; j < grid.n_points; ++j) probe[j] *= window[j];
        fft.backward(probe);
    }
    const double inside = region_mass(probe, grid, -barrier.support_half_width(),
                                      barrier.support_half_width());
    if (inside > 1e-8)
        throw domain_error("split_outcomes: interaction-region mass above 1e-8 (premature split)");

    SplitResult out;
    out.transmitted.t = out.reflected.t = state.t;
    out.transmitted.psi.assign(grid.n_points, cd{});
    out.reflected.psi.assign(grid.n_points, cd{});
    const double w = grid.dx() / grid.n_points; // Parseval weight
    for (int j = 0; j < grid.n_points; ++j) {
        if (grid.k(j) > 0.0) {
            out.transmitted.psi[j] = spec[j];
            out.probs.p_tr += std::norm(spec[j]) * w;
        } else {
            out.reflected.psi[j] = spec[j];
            out.probs.p_re += std::norm(spec[j]) * w;
        }
    }
    fft.backward(out.transmitted.psi);
    fft.backward(out.reflected.psi);
    return out;
}

SpectralDelay spectral_conditional_delay(const BarrierSpec& barrier,
                                         const WavePacketSpec& packet, Outcome which,
                                         const UnitSystem& units) {
    packet.validate();
    barrier.validate();
    units.validate();

    const double sigma_k = 1.0 / (2.0 * packet.sigma);
    const int half_nodes = 6;
    if (packet.k0 - half_nodes * sigma_k <= 0.0)
        throw domain_error("spectral_conditional_delay: spectrum reaches k <= 0");

    // Uniform wavenumber window k0 +- 6 sigma_k, one node per sigma_k; the
    // E <-> k Jacobians cancel between numerator and denominator.
    std::vector<double> ks;
    for (int i = -half_nodes; i <= half_nodes; ++i) ks.push_back(packet.k0 + i * sigma_k);

    EnergyGrid grid;
    for (double k : ks) grid.energies.push_back(units.energy_of(k));
    const auto amps = amplitude_over_grid(barrier, grid, units);
    const PhaseCurve curve = unwrap_phases(amps);

    double wsum = 0.0, tsum = 0.0, esum = 0.0, psum = 0.0, gsum = 0.0;
    bool missing_tau = false;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double trap = (i == 0 || i + 1 == ks.size()) ? 0.5 : 1.0;
        const double dk = ks[i] - packet.k0;
        const double phi2 = std::exp(-2.0 * packet.sigma * packet.sigma * dk * dk);
        const cd amp = which == Outcome::transmitted ? amps[i].T : amps[i].L;
        const double w = trap * phi2 * std::norm(amp);
        gsum += trap * phi2;
        psum += w;
        if (w <= 0.0) continue;

        const auto set = delays_at(curve, grid.energies[i], units);
        const auto tau = which == Outcome::transmitted ? set.tau_tr : set.tau_left;
        if (!tau) {
            missing_tau = true;
            continue;
        }
        wsum += w;
        tsum += w * *tau;
        esum += w * set.derivative_error_estimate;
    }

    SpectralDelay res;
    res.probability = psum / gsum;
    if (res.probability < 1e-12)
        throw domain_error("spectral_conditional_delay: outcome probability below 1e-12");
    if (wsum <= 0.0 || missing_tau)
        throw domain_error("spectral_conditional_delay: delay undefined over the spectrum");
    res.tau = tsum / wsum;
    res.derivative_error = esum / wsum;
    return res;
}

double centroid_delay_estimate(const Trajectory& traj, Outcome which, double plane) {
    const auto& grid = traj.grid;
    Fft fft(grid.n_points);
    std::vector<cd> spec = traj.final_state.psi;
    fft.forward(spec);

    // moments over the branch's physical band; the high-k splitting residue
    // must not enter a possibly exponentially small branch
    const bool transmitted = which == Outcome::transmitted;
    const auto window = band_window(grid, traj.k_guard);
    std::vector<cd> branch(grid.n_points, cd{});
    double prob = 0.0, kmean = 0.0;
    const double w = grid.dx() / grid.n_points;
    for (int j = 0; j < grid.n_points; ++j) {
        const double k = grid.k(j);
        if (transmitted ? (k > 0.0) : (k <= 0.0)) {
            branch[j] = spec[j] * window[j];
            const double p = std::norm(branch[j]) * w;
            prob += p;
            kmean += p * k;
        }
    }
    if (prob < 1e-6)
        throw domain_error("centroid_delay_estimate: branch probability below 1e-6");
    kmean /= prob;

    fft.backward(branch);
    double xb = 0.0, mass = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double p = std::norm(branch[j]);
        xb += p * grid.x(j);
        mass += p;
    }
    xb /= mass;

    const double vb = traj.units.hbar * kmean / traj.units.mass;
    if (transmitted ? (vb <= 0.0) : (vb >= 0.0))
        throw domain_error("centroid_delay_estimate: branch mean velocity has the wrong sign");
    if (transmitted ? (xb < plane) : (xb > plane))
        throw domain_error("centroid_delay_estimate: centroid never crossed the plane");

    // Virtual crossing of the branch's asymptotic straight-line trajectory,
    // against a same-initial-data free reference (mirror image for the
    // reflected branch) moving at hbar k0 / m.
    const double t_cross = traj.final_state.t - (xb - plane) / vb;
    const double v0 = traj.units.hbar * traj.packet.k0 / traj.units.mass;
    const double ref_plane = transmitted ? plane : -plane;
    const double t_free = (ref_plane - traj.packet.x0) / v0;
    return t_cross - t_free;
}

} // namespace qscat
