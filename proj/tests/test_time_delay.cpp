#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qscat/reference.hpp"
#include "qscat/time_delay.hpp"

using namespace qscat;

TEST_CASE("unwrap leaves constants alone and removes wraps") {
    std::vector<ScatteringAmplitudes> amps(6);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        amps[i].E = 1.0 + 0.1 * i;
        amps[i].T = std::polar(1.0, 0.3);
        amps[i].L = amps[i].R = std::polar(0.5, -3.0 - 0.1 * i); // walks through -pi
    }
    const auto curve = unwrap_phases(amps);
    for (double a : curve.alpha_T) CHECK(a == doctest::Approx(0.3));
    for (std::size_t i = 1; i < curve.alpha_L.size(); ++i) {
        CHECK(curve.alpha_L[i] - curve.alpha_L[i - 1] == doctest::Approx(-0.1));
    }
}

TEST_CASE("unwrapped rectangular transmission phase differentiates to the oracle delay") {
    BarrierSpec rect{1.0, 1.0, 0.0, TransitionProfile::linear};
    EnergyGrid grid = linspace_grid(0.40, 0.60, 201);
    const auto amps = amplitude_over_grid(rect, grid);
    const auto curve = unwrap_phases(amps);
    const auto set = delays_at(curve, 0.5);
    REQUIRE(set.tau_tr.has_value());
    // frozen from the analytic formula at E = V0/2, hbar = m = 1
    CHECK(*set.tau_tr == doctest::Approx(-0.071944839848366232).epsilon(1e-5));
    CHECK(*set.tau_tr ==
          doctest::Approx(rectangular_transmission_delay_tunneling(1.0, 1.0, 0.5)).epsilon(1e-5));
}

TEST_CASE("analytic and numeric oracle delays agree") {
    for (double E : {0.2, 0.5, 0.85}) {
        const double analytic = rectangular_transmission_delay_tunneling(1.0, 1.2, E);
        const double numeric = rectangular_transmission_delay_numeric(1.0, 1.2, E);
        CHECK(analytic == doctest::Approx(numeric).epsilon(1e-7));
    }
}

TEST_CASE("dedicated stencil matches the analytic delay") {
    BarrierSpec rect{1.0, 1.0, 0.0, TransitionProfile::linear};
    const auto set = delays_for_barrier(rect, 0.5);
    REQUIRE(set.tau_tr.has_value());
    CHECK(*set.tau_tr == doctest::Approx(-0.071944839848366232).epsilon(1e-6));
    CHECK(set.derivative_error_estimate < 1e-6);
    CHECK((set.flags & flag::edge_derivative) == 0);

    // symmetric barrier: left and right reflection delays coincide
    REQUIRE(set.tau_left.has_value());
    REQUIRE(set.tau_right.has_value());
    CHECK(std::abs(*set.tau_left - *set.tau_right) < 1e-6);
}

TEST_CASE("null barrier has no reflection delay") {
    BarrierSpec null{0.0, 1.0, 0.0, TransitionProfile::linear};
    const auto set = delays_for_barrier(null, 1.0);
    REQUIRE(set.tau_tr.has_value());
    CHECK(std::abs(*set.tau_tr) < 1e-9);
    CHECK_FALSE(set.tau_left.has_value());
    CHECK_FALSE(set.tau_right.has_value());
    CHECK((set.flags & flag::missing_phase) != 0);
    CHECK_FALSE(verify_delay_identity(set).has_value());
}

TEST_CASE("phase offset invariance") {
    BarrierSpec spec{1.0, 1.0, 0.5, TransitionProfile::smoothstep3};
    EnergyGrid grid = linspace_grid(0.5, 0.7, 21);
    const auto amps = amplitude_over_grid(spec, grid);
    auto curve = unwrap_phases(amps);
    const auto base = delays_at(curve, 0.6);
    for (auto& a : curve.alpha_T) a += 2.0 * M_PI;
    for (auto& a : curve.alpha_L) a += 17.0;
    const auto shifted = delays_at(curve, 0.6);
    REQUIRE(base.tau_tr.has_value());
    REQUIRE(shifted.tau_tr.has_value());
    CHECK(std::abs(*base.tau_tr - *shifted.tau_tr) < 1e-9 * (1.0 + std::abs(*base.tau_tr)));
    CHECK(std::abs(*base.tau_left - *shifted.tau_left) < 1e-9 * (1.0 + std::abs(*base.tau_left)));
}

TEST_CASE("delay identity") {
    TimeDelaySet synthetic;
    synthetic.tau_tr = 5.0;
    synthetic.tau_left = 4.0;
    synthetic.tau_right = 6.0;
    CHECK(*verify_delay_identity(synthetic) == 0.0);

    // rectangular, both sides from oracle amplitudes
    {
        const auto set = delays_for(
            [&](double e) { return rectangular_amplitudes(1.0, 1.0, e); }, 0.5);
        const auto res = verify_delay_identity(set);
        REQUIRE(res.has_value());
        CHECK(std::abs(*res) <= 1e-6 * std::abs(*set.tau_tr));
    }

    // smooth barrier at converged slicing
    {
        BarrierSpec spec{1.0, 1.0, 0.7, TransitionProfile::smoothstep5};
        const auto set = delays_for_barrier(spec, 0.8);
        const auto res = verify_delay_identity(set);
        REQUIRE(res.has_value());
        CHECK(std::abs(*res) <= std::max(1e-6, 3.0 * set.derivative_error_estimate));
    }

    // random symmetric barriers
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        BarrierSpec s;
        s.v0 = 0.4 + 3.0 * u01(rng);
        s.a = 0.3 + 1.5 * u01(rng);
        s.b = u01(rng) < 0.3 ? 0.0 : 0.1 + 1.0 * u01(rng);
        s.profile = static_cast<TransitionProfile>(static_cast<int>(4.0 * u01(rng)) % 4);
        for (int j = 0; j < 10; ++j) {
            const double E = (0.15 + 2.5 * u01(rng)) * s.v0;
            const auto set = delays_for_barrier(s, E);
            const auto res = verify_delay_identity(set);
            if (!res) continue;
            CHECK(std::abs(*res) <= std::max(1e-6, 3.0 * set.derivative_error_estimate));
        }
    }
}

TEST_CASE("grid halving stability") {
    BarrierSpec spec{1.0, 1.0, 0.6, TransitionProfile::cosine};
    EnergyGrid coarse = linspace_grid(0.5, 0.9, 21);
    EnergyGrid fine = linspace_grid(0.5, 0.9, 41);
    const auto sc = delays_at(unwrap_phases(amplitude_over_grid(spec, coarse)), 0.7);
    const auto sf = delays_at(unwrap_phases(amplitude_over_grid(spec, fine)), 0.7);
    REQUIRE(sc.tau_tr.has_value());
    REQUIRE(sf.tau_tr.has_value());
    CHECK(std::abs(*sc.tau_tr - *sf.tau_tr) <=
          3.0 * std::max(sc.derivative_error_estimate, 1e-12));
}

TEST_CASE("edge of grid flags a one-sided stencil") {
    BarrierSpec spec{1.0, 1.0, 0.0, TransitionProfile::linear};
    EnergyGrid grid = linspace_grid(0.4, 0.6, 9);
    const auto curve = unwrap_phases(amplitude_over_grid(spec, grid));
    const auto set = delays_at(curve, 0.4);
    CHECK((set.flags & flag::edge_derivative) != 0);
    const auto interior = delays_at(curve, 0.5);
    CHECK((interior.flags & flag::edge_derivative) == 0);
}

TEST_CASE("hartman sweep saturates the dwell time") {
    BarrierSpec rect{1.0, 1.0, 0.0, TransitionProfile::linear};
    const double E = 0.5; // kappa = k = 1
    const std::vector<double> a_values = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    const auto rows = hartman_sweep(rect, E, a_values);
    REQUIRE(rows.size() == a_values.size());

    // dwell differences shrink until they reach the derivative noise floor,
    // then stay below it; the tail approaches 2 m / (hbar k kappa)
    double prev_diff = std::abs(rows[1].dwell - rows[0].dwell);
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double diff = std::abs(rows[i].dwell - rows[i - 1].dwell);
        const double floor =
            3.0 * (rows[i].derivative_error_estimate + rows[i - 1].derivative_error_estimate);
        CHECK((diff < prev_diff || diff <= floor));
        prev_diff = diff;
    }
    CHECK(std::abs(rows[1].dwell - rows[0].dwell) > 1e-4); // still far at kappa a = 1
    CHECK(rows.back().dwell ==
          doctest::Approx(rectangular_dwell_saturation(1.0, E)).epsilon(1e-4));

    // tau_tr / (-2a/v) -> 1 and v_eff grows without bound
    const auto& last = rows.back();
    CHECK(last.tau_tr / (-2.0 * last.a / last.v) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(last.v_eff > 10.0 * last.v);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].v_eff > rows[i - 1].v_eff);
}

TEST_CASE("hartman sweep rejects bad input and flags underflow") {
    BarrierSpec rect{1.0, 1.0, 0.0, TransitionProfile::linear};
    CHECK_THROWS_AS(hartman_sweep(rect, 1.5, {1.0, 2.0}), domain_error);
    CHECK_THROWS_AS(hartman_sweep(rect, 0.5, {2.0, 1.0}), config_error);

    // kappa w = 2 kappa a > 745 underflows |T|; row must be flagged
    const auto rows = hartman_sweep(rect, 0.5, {100.0, 500.0});
    CHECK(rows[0].flags == 0);
    CHECK(std::isfinite(rows[0].dwell));
    CHECK((rows[1].flags & flag::underflow) != 0);
    CHECK(!std::isfinite(rows[1].tau_tr));
}
