#include <string>

#include <CLI11.hpp>

#include "qscat/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qscat - one-dimensional quantum scattering laboratory"};
    app.require_subcommand(1);

    qscat::CliOptions opts;
    const std::vector<std::string> names = {"amplitudes", "delays",       "hartman", "classical",
                                            "semiclassical", "wavepacket", "verify"};
    const std::vector<std::string> descs = {
        "scattering amplitudes S(E) over an energy grid",
        "phase-derivative time delays and the transmission/reflection identity",
        "barrier-width sweep of the transmission delay, dwell time and v_eff",
        "classical reflection delay by turning-point quadrature",
        "quantum vs classical reflection delay across lambda/b",
        "split-operator wave-packet run: sojourn times, outcome split, delays",
        "full invariant suite: unitarity, phase relation, oracles, identities"};

    for (std::size_t i = 0; i < names.size(); ++i) {
        auto* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", opts.config_path, "JSON configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory (default: out)");
        sub->add_option("--threads", opts.threads, "worker threads for sweeps")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", opts.seed, "seed for randomized property checks");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    return qscat::run_subcommand(app.get_subcommands().front()->get_name(), opts);
}
