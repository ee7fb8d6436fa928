#include "qscat/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qscat/classical.hpp"
#include "qscat/potential.hpp"
#include "qscat/reference.hpp"
#include "qscat/scattering.hpp"
#include "qscat/time_delay.hpp"
#include "qscat/units.hpp"
#include "qscat/wavepacket.hpp"

namespace qscat {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- utilities

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw config_error("cannot open output file " + path.string());
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << fmt(values[i]);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

void require_keys(const json& j, const char* block, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw config_error(std::string(block) + " must be a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known)
            throw config_error(std::string(block) + ": unknown key '" + item.key() + "'");
    }
}

struct LoadedConfig {
    json raw;
    BarrierSpec barrier;
    UnitSystem units;
    Tolerances tol;
};

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    LoadedConfig cfg;
    try {
        in >> cfg.raw;
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(cfg.raw, "config",
                 {"barrier", "units", "tolerances", "amplitudes", "delays", "hartman",
                  "classical", "semiclassical", "wavepacket", "verify"});
    if (!cfg.raw.contains("barrier")) throw config_error("config: missing 'barrier' block");
    cfg.barrier = cfg.raw.at("barrier").get<BarrierSpec>();
    if (cfg.raw.contains("units")) {
        const auto& u = cfg.raw.at("units");
        require_keys(u, "units", {"hbar", "mass"});
        cfg.units.hbar = u.value("hbar", 1.0);
        cfg.units.mass = u.value("mass", 1.0);
        cfg.units.validate();
    }
    if (cfg.raw.contains("tolerances")) {
        const auto& t = cfg.raw.at("tolerances");
        require_keys(t, "tolerances", {"unitarity", "phase", "delay", "quadrature", "packet"});
        cfg.tol.unitarity = t.value("unitarity", cfg.tol.unitarity);
        cfg.tol.phase = t.value("phase", cfg.tol.phase);
        cfg.tol.delay = t.value("delay", cfg.tol.delay);
        cfg.tol.quadrature = t.value("quadrature", cfg.tol.quadrature);
        cfg.tol.packet = t.value("packet", cfg.tol.packet);
    }
    return cfg;
}

const json& get_block(const LoadedConfig& cfg, const char* name) {
    if (!cfg.raw.contains(name))
        throw config_error(std::string("config: missing '") + name + "' block");
    return cfg.raw.at(name);
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

class Report {
  public:
    Report(const LoadedConfig& cfg, const CliOptions& opts, const std::string& subcommand)
        : cfg_(cfg), subcommand_(subcommand), opts_(opts) {}

    void check(const std::string& name, double observed, double tolerance) {
        const bool ok = std::isfinite(observed) && observed <= tolerance;
        checks_.push_back({name, ok, observed, tolerance});
        std::printf("[%s] %-44s %s  (observed %.3e, tolerance %.3e)\n", subcommand_.c_str(),
                    name.c_str(), ok ? "pass" : "FAIL", observed, tolerance);
    }
    void check_flag(const std::string& name, bool ok) {
        checks_.push_back({name, ok, ok ? 0.0 : 1.0, 0.5});
        std::printf("[%s] %-44s %s\n", subcommand_.c_str(), name.c_str(), ok ? "pass" : "FAIL");
    }
    void note_output(const std::filesystem::path& p) { outputs_.push_back(p.string()); }
    void payload(json j) { payload_ = std::move(j); }

    bool all_passed() const {
        return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
    }

    int finalize() const {
        json rep;
        rep["tool"] = "qscat";
        rep["version"] = kVersion;
        rep["timestamp"] = timestamp_utc();
        rep["subcommand"] = subcommand_;
        rep["config"] = cfg_.raw;
        rep["seed"] = opts_.seed;
        rep["threads"] = opts_.threads;
        rep["tolerances"] = {{"unitarity", cfg_.tol.unitarity},
                             {"phase", cfg_.tol.phase},
                             {"delay", cfg_.tol.delay},
                             {"quadrature", cfg_.tol.quadrature},
                             {"packet", cfg_.tol.packet}};
        json checks = json::array();
        for (const auto& c : checks_)
            checks.push_back({{"name", c.name},
                              {"passed", c.passed},
                              {"observed", c.observed},
                              {"tolerance", c.tolerance}});
        rep["checks"] = checks;
        rep["outputs"] = outputs_;
        if (!payload_.is_null()) rep["results"] = payload_;
        rep["all_passed"] = all_passed();

        const auto path = std::filesystem::path(opts_.out_dir) / (subcommand_ + "_report.json");
        std::ofstream out(path);
        out << rep.dump(2) << "\n";

        if (!all_passed()) {
            for (const auto& c : checks_)
                if (!c.passed)
                    std::fprintf(stderr, "failed check: %s (observed %.6e, tolerance %.6e)\n",
                                 c.name.c_str(), c.observed, c.tolerance);
            return 1;
        }
        return 0;
    }

  private:
    const LoadedConfig& cfg_;
    std::string subcommand_;
    CliOptions opts_;
    std::vector<Check> checks_;
    std::vector<std::string> outputs_;
    json payload_;
};

double nan_safe(std::optional<double> v) {
    return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

// -------------------------------------------------------------- subcommands

int run_amplitudes(const LoadedConfig& cfg, const CliOptions& opts) {
    const auto& blk = get_block(cfg, "amplitudes");
    require_keys(blk, "amplitudes", {"e_min", "e_max", "n"});
    const auto grid = linspace_grid(blk.at("e_min").get<double>(), blk.at("e_max").get<double>(),
                                    blk.at("n").get<int>());
    grid.validate();

    const auto amps = amplitude_over_grid(cfg.barrier, grid, cfg.units, std::nullopt, opts.threads);

    Report report(cfg, opts, "amplitudes");
    const auto csv_path = std::filesystem::path(opts.out_dir) / "amplitudes.csv";
    CsvWriter csv(csv_path, {"E", "reT", "imT", "reL", "imL", "reR", "imR", "absT2",
                             "unitarity_residual", "phase_residual"});
    double max_unit = 0.0, max_phase = 0.0;
    for (const auto& a : amps) {
        double phase_res = std::numeric_limits<double>::quiet_NaN();
        try {
            phase_res = check_phase_relation(a);
            max_phase = std::max(max_phase, std::abs(phase_res));
        } catch (const domain_error&) {
        }
        if (a.ok()) max_unit = std::max(max_unit, a.unitarity_residual());
        csv.row({a.E, a.T.real(), a.T.imag(), a.L.real(), a.L.imag(), a.R.real(), a.R.imag(),
                 std::norm(a.T), a.unitarity_residual(), phase_res});
    }
    report.note_output(csv_path);
    report.check("max unitarity residual", max_unit, cfg.tol.unitarity);
    report.check("max phase-relation residual", max_phase, cfg.tol.phase);
    return report.finalize();
}

int run_delays(const LoadedConfig& cfg, const CliOptions& opts) {
    const auto& blk = get_block(cfg, "delays");
    require_keys(blk, "delays", {"e_min", "e_max", "n"});
    const auto grid = linspace_grid(blk.at("e_min").get<double>(), blk.at("e_max").get<double>(),
                                    blk.at("n").get<int>());
    if (grid.size() < 5) throw config_error("delays: need n >= 5 for the stencil");

    const auto amps = amplitude_over_grid(cfg.barrier, grid, cfg.units, std::nullopt, opts.threads);
    const auto curve = unwrap_phases(amps);

    Report report(cfg, opts, "delays");
    const auto csv_path = std::filesystem::path(opts.out_dir) / "delays.csv";
    CsvWriter csv(csv_path, {"E", "tau_tr", "tau_left", "tau_right", "identity_residual",
                             "error_estimate", "flags"});
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
        const auto set = delays_at(curve, grid.energies[i], cfg.units);
        const auto res = verify_delay_identity(set);
        if (res) {
            const double bound = std::max(cfg.tol.delay, 3.0 * set.derivative_error_estimate);
            worst = std::max(worst, std::abs(*res) / bound);
        }
        csv.row({set.E, nan_safe(set.tau_tr), nan_safe(set.tau_left), nan_safe(set.tau_right),
                 res ? *res : std::numeric_limits<double>::quiet_NaN(),
                 set.derivative_error_estimate, static_cast<double>(set.flags)});
    }
    report.note_output(csv_path);
    report.check("delay identity residual / bound", worst, 1.0);
    return report.finalize();
}

int run_hartman(const LoadedConfig& cfg, const CliOptions& opts) {
    const auto& blk = get_block(cfg, "hartman");
    require_keys(blk, "hartman", {"energy", "a_values"});
    const double E = blk.at("energy").get<double>();
    const auto a_values = blk.at("a_values").get<std::vector<double>>();

    const auto rows = hartman_sweep(cfg.barrier, E, a_values, cfg.units);

    Report report(cfg, opts, "hartman");
    const auto csv_path = std::filesystem::path(opts.out_dir) / "hartman.csv";
    CsvWriter csv(csv_path, {"a", "tau_tr", "T_tr", "v_eff", "v", "absT2", "flags"});
    bool rows_ok = true;
    for (const auto& r : rows) {
        csv.row({r.a, r.tau_tr, r.dwell, r.v_eff, r.v, r.abs_T2, static_cast<double>(r.flags)});
        if (!std::isfinite(r.dwell) && r.flags == 0) rows_ok = false;
    }
    report.note_output(csv_path);
    report.check_flag("all rows finite or explicitly flagged", rows_ok);
    return report.finalize();
}

int run_classical(const LoadedConfig& cfg, const CliOptions& opts) {
    const auto& blk = get_block(cfg, "classical");
    require_keys(blk, "classical", {"energies"});
    const auto energies = blk.at("energies").get<std::vector<double>>();

    Report report(cfg, opts, "classical");
    const auto csv_path = std::filesystem::path(opts.out_dir) / "classical.csv";
    CsvWriter csv(csv_path, {"E", "s0", "transition_term", "plateau_term", "tau_cl"});
    double worst_floor = 0.0;
    for (double E : energies) {
        const auto res = classical_reflection_delay(cfg.barrier, E, cfg.units,
                                                    cfg.tol.quadrature);
        csv.row({res.E, res.s0, res.transition_term, res.plateau_term, res.tau_cl});
        const double v = cfg.units.velocity(E);
        const double slack = res.tau_cl + 2.0 * cfg.barrier.support_half_width() / v;
        worst_floor = std::max(worst_floor, -slack);
    }
    report.note_output(csv_path);
    report.check("interacting sojourn time >= 0 (violation)", worst_floor, 1e-12);
    return report.finalize();
}

int run_semiclassical(const LoadedConfig& cfg, const CliOptions& opts) {
    const auto& blk = get_block(cfg, "semiclassical");
    require_keys(blk, "semiclassical", {"energy", "lambda_over_b"});
    const double E = blk.at("energy").get<double>();
    auto ratios = blk.at("lambda_over_b").get<std::vector<double>>();
    if (ratios.empty()) throw config_error("semiclassical: lambda_over_b must be non-empty");

    const double lambda = cfg.units.de_broglie(E);
    Report report(cfg, opts, "semiclassical");
    const auto csv_path = std::filesystem::path(opts.out_dir) / "semiclassical.csv";
    CsvWriter csv(csv_path, {"lambda_over_b", "b", "tau_quantum", "tau_classical",
                             "rel_discrepancy"});
    std::vector<std::pair<double, double>> measured; // (ratio, rel discrepancy)
    for (double ratio : ratios) {
        BarrierSpec spec = cfg.barrier;
        spec.b = lambda / ratio;
        const auto cmp = semiclassical_comparison(spec, E, cfg.units);
        const double rel =
            std::abs(cmp.tau_quantum - cmp.tau_classical) / std::abs(cmp.tau_classical);
        csv.row({cmp.lambda_over_b, spec.b, cmp.tau_quantum, cmp.tau_classical, rel});
        measured.emplace_back(ratio, rel);
    }
    report.note_output(csv_path);

    std::sort(measured.begin(), measured.end(),
              [](auto& lhs, auto& rhs) { return lhs.first > rhs.first; });
    bool trend = true;
    for (std::size_t i = 1; i < measured.size(); ++i)
        if (!(measured[i].second < measured[i - 1].second)) trend = false;
    report.check_flag("discrepancy shrinks with lambda/b", trend);
    return report.finalize();
}

int run_wavepacket(const LoadedConfig& cfg, const CliOptions& opts) {
    const auto& blk = get_block(cfg, "wavepacket");
    require_keys(blk, "wavepacket", {"packet", "grid", "region_R"});
    const auto& pj = blk.at("packet");
    require_keys(pj, "wavepacket.packet", {"x0", "k0", "sigma"});
    WavePacketSpec packet{pj.at("x0").get<double>(), pj.at("k0").get<double>(),
                          pj.at("sigma").get<double>()};
    const auto& gj = blk.at("grid");
    require_keys(gj, "wavepacket.grid", {"xmin", "xmax", "n", "dt", "tmax"});
    SimulationGrid grid;
    grid.x_min = gj.at("xmin").get<double>();
    grid.x_max = gj.at("xmax").get<double>();
    grid.n_points = gj.at("n").get<int>();
    grid.dt = gj.at("dt").get<double>();
    grid.t_max = gj.at("tmax").get<double>();
    grid.validate();
    const double R = blk.at("region_R").get<double>();
    if (!(R > cfg.barrier.support_half_width()))
        throw config_error("wavepacket.region_R must exceed the barrier support a+b");

    const auto wp = initialize_gaussian(packet, grid, cfg.barrier, cfg.units);
    EvolveOptions evo;
    evo.monitor_radii = {R, 2.0 * R};
    const auto traj = evolve(wp, packet, cfg.barrier, grid, cfg.units, evo);
    const auto split = split_outcomes(traj.final_state, grid, cfg.barrier, traj.k_guard);

    Report report(cfg, opts, "wavepacket");
    const auto csv_path = std::filesystem::path(opts.out_dir) / "wavepacket.csv";
    CsvWriter csv(csv_path, {"t", "P_R", "P_R_free", "centroid", "norm"});
    const auto& reg = traj.regions.front();
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        csv.row({traj.times[i], reg.p_interacting[i],
                 reg.p_free.empty() ? std::numeric_limits<double>::quiet_NaN() : reg.p_free[i],
                 traj.centroids[i], traj.norms[i]});
    report.note_output(csv_path);

    json summary;
    summary["p_tr"] = split.probs.p_tr;
    summary["p_re"] = split.probs.p_re;

    double norm_drift = 0.0;
    for (double n : traj.norms) norm_drift = std::max(norm_drift, std::abs(n - traj.norms[0]));
    report.check("norm drift", norm_drift, 1e-10);
    report.check("|P_tr + P_re - 1|", std::abs(split.probs.p_tr + split.probs.p_re - 1.0), 1e-6);

    const auto spec_tr =
        spectral_conditional_delay(cfg.barrier, packet, Outcome::transmitted, cfg.units);
    summary["delays"]["spectral_transmitted"] = spec_tr.tau;
    summary["spectral_p_tr"] = spec_tr.probability;
    report.check("|P_tr - spectral prediction| / P_tr",
                 std::abs(split.probs.p_tr - spec_tr.probability) /
                     std::max(split.probs.p_tr, 1e-300),
                 0.01);

    try {
        const auto spec_re =
            spectral_conditional_delay(cfg.barrier, packet, Outcome::reflected, cfg.units);
        summary["delays"]["spectral_reflected"] = spec_re.tau;
    } catch (const domain_error&) {
        summary["delays"]["spectral_reflected"] = nullptr;
    }

    const double plane = cfg.barrier.support_half_width();
    try {
        summary["delays"]["centroid_transmitted"] =
            centroid_delay_estimate(traj, Outcome::transmitted, plane);
    } catch (const domain_error&) {
        summary["delays"]["centroid_transmitted"] = nullptr;
    }
    try {
        summary["delays"]["centroid_reflected"] =
            centroid_delay_estimate(traj, Outcome::reflected, -plane);
    } catch (const domain_error&) {
        summary["delays"]["centroid_reflected"] = nullptr;
    }

    json sojourns = json::array();
    for (double r : evo.monitor_radii) {
        const auto rec = sojourn_time(traj, r);
        sojourns.push_back({{"R", rec.R},
                            {"T_interacting", rec.T_interacting},
                            {"T_free", rec.T_free},
                            {"delay", rec.T_interacting - rec.T_free},
                            {"truncation_estimate", rec.truncation_estimate}});
    }
    summary["sojourn"] = sojourns;

    const auto summary_path = std::filesystem::path(opts.out_dir) / "wavepacket_summary.json";
    std::ofstream(summary_path) << summary.dump(2) << "\n";
    report.note_output(summary_path);
    report.payload(summary);
    return report.finalize();
}

int run_verify(const LoadedConfig& cfg, const CliOptions& opts) {
    json vblk = cfg.raw.contains("verify") ? cfg.raw.at("verify") : json::object();
    require_keys(vblk, "verify", {"n_specs", "n_energies", "delay_specs", "delay_energies"});
    const int n_specs = vblk.value("n_specs", 50);
    const int n_energies = vblk.value("n_energies", 20);
    const int delay_specs = vblk.value("delay_specs", 5);
    const int delay_energies = vblk.value("delay_energies", 3);

    Report report(cfg, opts, "verify");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    auto random_spec = [&] {
        BarrierSpec s;
        s.v0 = 0.3 + 3.7 * u01(rng);
        s.a = 0.3 + 2.2 * u01(rng);
        s.b = u01(rng) < 0.25 ? 0.0 : 0.1 + 1.4 * u01(rng);
        s.profile = static_cast<TransitionProfile>(static_cast<int>(4.0 * u01(rng)) % 4);
        return s;
    };

    // 1-3: unitarity, left/right symmetry, phase relation over random barriers
    double max_unit = 0.0, max_sym = 0.0, max_phase = 0.0;
    for (int i = 0; i < n_specs; ++i) {
        const BarrierSpec s = random_spec();
        for (int j = 0; j < n_energies; ++j) {
            const double E = (0.05 + 3.45 * u01(rng)) * s.v0;
            const auto amps = scattering_matrix(s, E, cfg.units);
            max_unit = std::max(max_unit, amps.unitarity_residual());
            max_sym = std::max(max_sym, std::abs(amps.L - amps.R));
            try {
                max_phase = std::max(max_phase, std::abs(check_phase_relation(amps)));
            } catch (const domain_error&) {
            }
        }
    }
    report.check("unitarity residual (random barriers)", max_unit, cfg.tol.unitarity);
    report.check("|L - R| for symmetric barriers", max_sym, cfg.tol.unitarity);
    report.check("phase-relation residual", max_phase, cfg.tol.phase);

    // 4: closed-form oracle for the configured barrier when rectangular
    if (cfg.barrier.b == 0.0) {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double frac = (i + 0.5) / 100.0;
            const double E =
                frac < 0.5 ? (2.0 * frac) * cfg.barrier.v0 * 0.999
                           : cfg.barrier.v0 * (1.001 + (frac - 0.5) * 6.0);
            const auto num = scattering_matrix(cfg.barrier, E, cfg.units);
            const auto ref = rectangular_amplitudes(cfg.barrier.v0, cfg.barrier.a, E, cfg.units);
            worst = std::max({worst, std::abs(num.T - ref.T), std::abs(num.L - ref.L),
                              std::abs(num.R - ref.R)});
        }
        report.check("rectangular closed-form oracle", worst, cfg.tol.unitarity);
    }

    // 5: delay identity on the configured barrier plus random symmetric specs
    double worst_identity = 0.0;
    for (int i = 0; i < delay_specs; ++i) {
        const BarrierSpec s = i == 0 ? cfg.barrier : random_spec();
        for (int j = 0; j < delay_energies; ++j) {
            const double E = (0.2 + 2.0 * u01(rng)) * s.v0;
            const auto set = delays_for_barrier(s, E, cfg.units);
            const auto res = verify_delay_identity(set);
            if (!res) continue;
            const double bound = std::max(cfg.tol.delay, 3.0 * set.derivative_error_estimate);
            worst_identity = std::max(worst_identity, std::abs(*res) / bound);
        }
    }
    report.check("delay identity residual / bound", worst_identity, 1.0);

    // 6: classical quadrature vs the hand-integrated linear ramp
    double worst_classical = 0.0;
    for (int i = 0; i < 10; ++i) {
        BarrierSpec s;
        s.v0 = 0.5 + 2.0 * u01(rng);
        s.a = 1.0;
        s.b = 0.2 + 2.0 * u01(rng);
        s.profile = TransitionProfile::linear;
        const double E = (0.1 + 0.8 * u01(rng)) * s.v0;
        const auto res = classical_reflection_delay(s, E, cfg.units, cfg.tol.quadrature);
        const double ref = linear_ramp_transition_term(s.v0, s.b, E, cfg.units);
        worst_classical = std::max(worst_classical, std::abs(res.transition_term - ref));
    }
    report.check("classical linear-ramp oracle", worst_classical, cfg.tol.quadrature);

    return report.finalize();
}

} // namespace

int run_subcommand(const std::string& name, const CliOptions& opts) {
    try {
        std::filesystem::create_directories(opts.out_dir);
        const LoadedConfig cfg = load_config(opts.config_path);
        if (name == "amplitudes") return run_amplitudes(cfg, opts);
        if (name == "delays") return run_delays(cfg, opts);
        if (name == "hartman") return run_hartman(cfg, opts);
        if (name == "classical") return run_classical(cfg, opts);
        if (name == "semiclassical") return run_semiclassical(cfg, opts);
        if (name == "wavepacket") return run_wavepacket(cfg, opts);
        if (name == "verify") return run_verify(cfg, opts);
        throw config_error("unknown subcommand '" + name + "'");
    } catch (const config_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 3;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
}

} // namespace qscat
