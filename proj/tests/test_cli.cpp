#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef QSCAT_CLI_PATH
#define QSCAT_CLI_PATH "qscat"
#endif
#ifndef QSCAT_CONFIG_DIR
#define QSCAT_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QSCAT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_temp_config(const std::string& name, const std::string& text) {
    const fs::path dir = fs::temp_directory_path() / "qscat_cli_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

const std::string kGolden = std::string(QSCAT_CONFIG_DIR) + "/rectangular.json";
const std::string kSmooth = std::string(QSCAT_CONFIG_DIR) + "/smooth.json";

} // namespace

TEST_CASE("verify passes on the bundled rectangular config") {
    CHECK(run_cli("verify --config " + kGolden + " --out /tmp/qscat_out_verify") == 0);
    CHECK(fs::exists("/tmp/qscat_out_verify/verify_report.json"));
    const auto report = slurp("/tmp/qscat_out_verify/verify_report.json");
    CHECK(report.find("\"all_passed\": true") != std::string::npos);
    CHECK(report.find("rectangular closed-form oracle") != std::string::npos);
    CHECK(report.find("unitarity") != std::string::npos);
    CHECK(report.find("delay identity") != std::string::npos);
}

TEST_CASE("amplitudes, delays, hartman and classical run green") {
    CHECK(run_cli("amplitudes --config " + kGolden + " --out /tmp/qscat_out_amp") == 0);
    CHECK(run_cli("delays --config " + kGolden + " --out /tmp/qscat_out_del") == 0);
    CHECK(run_cli("hartman --config " + kGolden + " --out /tmp/qscat_out_har") == 0);
    CHECK(run_cli("classical --config " + kGolden + " --out /tmp/qscat_out_cla") == 0);
    CHECK(run_cli("semiclassical --config " + kSmooth + " --out /tmp/qscat_out_sem") == 0);
}

TEST_CASE("identical config produces byte-identical CSV") {
    REQUIRE(run_cli("amplitudes --config " + kGolden + " --out /tmp/qscat_det_a") == 0);
    REQUIRE(run_cli("amplitudes --config " + kGolden + " --out /tmp/qscat_det_b --threads 2") == 0);
    const auto a = slurp("/tmp/qscat_det_a/amplitudes.csv");
    const auto b = slurp("/tmp/qscat_det_b/amplitudes.csv");
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("invalid config exits 2 naming the field") {
    const auto bad = write_temp_config("bad_a.json",
                                       R"({"barrier": {"v0": 1.0, "a": -1.0, "b": 0.0}})");
    CHECK(run_cli("amplitudes --config " + bad.string()) == 2);

    const auto unknown = write_temp_config(
        "unknown_key.json", R"({"barrier": {"v0": 1.0, "a": 1.0}, "extra_block": {}})");
    CHECK(run_cli("amplitudes --config " + unknown.string()) == 2);

    const auto missing = write_temp_config("missing_block.json",
                                           R"({"barrier": {"v0": 1.0, "a": 1.0}})");
    CHECK(run_cli("hartman --config " + missing.string()) == 2);
}

TEST_CASE("physics domain errors exit 3") {
    const auto over = write_temp_config("hartman_over.json", R"({
        "barrier": {"v0": 1.0, "a": 1.0, "b": 0.0, "profile": "linear"},
        "hartman": {"energy": 1.5, "a_values": [1.0, 2.0]}
    })");
    CHECK(run_cli("hartman --config " + over.string()) == 3);

    const auto classical_over = write_temp_config("classical_over.json", R"({
        "barrier": {"v0": 1.0, "a": 1.0, "b": 0.0, "profile": "linear"},
        "classical": {"energies": [1.5]}
    })");
    CHECK(run_cli("classical --config " + classical_over.string()) == 3);
}

TEST_CASE("wavepacket subcommand emits series and summary") {
    const std::string cfg = std::string(QSCAT_CONFIG_DIR) + "/wavepacket.json";
    CHECK(run_cli("wavepacket --config " + cfg + " --out /tmp/qscat_out_wp") == 0);
    CHECK(fs::exists("/tmp/qscat_out_wp/wavepacket.csv"));
    const auto summary = slurp("/tmp/qscat_out_wp/wavepacket_summary.json");
    CHECK(summary.find("\"p_tr\"") != std::string::npos);
    CHECK(summary.find("spectral_transmitted") != std::string::npos);
    CHECK(summary.find("sojourn") != std::string::npos);
}
