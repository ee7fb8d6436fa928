#ifndef QSCAT_HARNESS_HPP
#define QSCAT_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace qscat {

inline constexpr const char* kVersion = "0.1.0";

/// Tolerances used by the CLI checks. Config may tighten or relax them; the
/// defaults are the calibrated values used by the test suites.
struct Tolerances {
    double unitarity = 1e-8;
    double phase = 1e-8;
    double delay = 1e-6;
    double quadrature = 1e-10;
    double packet = 0.05;
};

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 42;
};

/// One asserted check of a run; every check names its tolerance.
struct Check {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double tolerance = 0.0;
};

/// Exit codes: 0 all checks pass, 1 a check failed, 2 invalid configuration,
/// 3 physics-domain error. Subcommands: amplitudes, delays, hartman,
/// classical, semiclassical, wavepacket, verify.
int run_subcommand(const std::string& name, const CliOptions& opts);

} // namespace qscat

#endif
