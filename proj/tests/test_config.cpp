#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "empc/config.hpp"
#include "empc/errors.hpp"
#include "empc/sim.hpp"

using namespace empc;

namespace {

ProjectConfig parse_text(const std::string& text, const std::string& name = "test.cfg") {
    std::istringstream in(text);
    return parse_config(in, name);
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("defaults describe the motor bench") {
        const ProjectConfig config = default_config();
        CHECK(config.motor.km == 8.32e-4);
        CHECK(config.motor.J == 2.45e-7);
        CHECK(config.motor.fm == 3.10e-5);
        CHECK(config.motor.Ra == 4.1);
        CHECK(config.motor.La == 2.27e-3);
        CHECK(config.Ts == 1e-3);
        CHECK(config.p == 1);
        CHECK(config.Bd.empty());
        CHECK(config.Cd.empty());
        CHECK(config.observer_poles == std::vector<double>{0.5, 0.6});
        CHECK(config.N == 2);
        CHECK(config.Q == 1.0);
        CHECK(config.R == 0.1);
        CHECK(config.u_min == 0.0);
        CHECK(config.u_max == 24.0);
        CHECK(config.pi_kp == 0.12);
        CHECK(config.pi_ki == 30.0);
        CHECK(config.pi_clamp);
    }

    TEST_CASE("full key coverage with comments and separators") {
        const ProjectConfig config = parse_text(
            "# motor\n"
            "km = 1e-3\n"
            "J = 3e-7\n"
            "fm = 4e-5\n"
            "Ra = 5.0\n"
            "La = 1e-3\n"
            "Ts = 0.002\n"
            "p = 1\n"
            "observer.poles = 0.4, 0.7\n"
            "N = 3\n"
            "Q = 2.5   # inline comment\n"
            "R = 0.2\n"
            "u_min = 0\n"
            "u_max = 12\n"
            "pi.kp = 0.3\n"
            "pi.ki = 10\n"
            "pi.clamp = off\n");
        CHECK(config.motor.km == 1e-3);
        CHECK(config.Ts == 0.002);
        CHECK(config.observer_poles == std::vector<double>{0.4, 0.7});
        CHECK(config.N == 3);
        CHECK(config.Q == 2.5);
        CHECK(config.R == 0.2);
        CHECK(config.u_max == 12.0);
        CHECK(config.pi_kp == 0.3);
        CHECK_FALSE(config.pi_clamp);
    }

    TEST_CASE("errors carry file and line context") {
        const auto expect_error_with = [](const std::string& text, const std::string& needle) {
            try {
                parse_text(text);
                FAIL("expected ConfigError for: ", text);
            } catch (const ConfigError& e) {
                const std::string what = e.what();
                CHECK(what.find(needle) != std::string::npos);
            }
        };

        expect_error_with("km 1\nJ 2\nwhat 3\n", "test.cfg:3");
        expect_error_with("km 1\nJ 2\nwhat 3\n", "unknown key");
        expect_error_with("Q = banana\n", "not a number");
        expect_error_with("Q = 1 2\n", "exactly one value");
        expect_error_with("N = 2.5\n", "positive integer");
        expect_error_with("N = 0\n", "positive integer");
        expect_error_with("Ts = -1\n", "Ts must be positive");
        expect_error_with("pi.clamp = maybe\n", "pi.clamp");
        expect_error_with("observer.poles =\n", "at least one value");
    }

    TEST_CASE("missing file is a config error") {
        CHECK_THROWS_AS(load_config("/nonexistent/nowhere.cfg"), ConfigError);
    }

    TEST_CASE("default design synthesizes the frozen bench law") {
        const ProjectConfig config = default_config();
        const DesignArtifacts art = build_design(config);

        CHECK(art.plant.Ts == 1e-3);
        CHECK(art.aug.size() == 3);
        CHECK(art.observer.observable_rank == 2);
        REQUIRE(art.law.regions.size() == 5);
        CHECK(art.law.dim == 5);
        CHECK(art.diagnostics.candidates == 11);

        // Loop setup borrows the law and mirrors the PI settings.
        const LoopSetup setup = make_loop_setup(config, art);
        CHECK(setup.law == &art.law);
        CHECK(setup.pi.kp == config.pi_kp);
        CHECK(setup.pi.Ts == config.Ts);

        // The synthesized closed loop actually tracks.
        std::istringstream scn("duration 0.5\nTs 0.001\nref 0 25\n");
        const Trace trace =
            run_closed_loop(parse_scenario(scn), setup, ControllerKind::ExplicitMpc);
        CHECK(std::abs(trace.samples.back().y - 25.0) < 1e-9);
    }

    TEST_CASE("explicit disturbance matrices are resolved row-major") {
        ProjectConfig config = default_config();
        config.Bd = {0.1, 0.2};  // n = 2, p = 1
        const DesignArtifacts art = build_design(config);
        CHECK(art.disturbance.Bd(0, 0) == 0.1);
        CHECK(art.disturbance.Bd(1, 0) == 0.2);
        // Cd not given: zero, the disturbance acts on the state only.
        CHECK(art.disturbance.Cd(0, 0) == 0.0);

        config.Bd = {0.1};  // wrong length
        CHECK_THROWS_AS(build_design(config), ConfigError);

        config.Bd.clear();
        config.Cd = {1.0, 2.0};  // m = 1, p = 1 needs exactly one entry
        CHECK_THROWS_AS(build_design(config), ConfigError);
    }

    TEST_CASE("observer pole count must match the observable rank") {
        ProjectConfig config = default_config();
        config.observer_poles = {0.5, 0.6, 0.7};  // rank is only 2
        CHECK_THROWS_AS(build_design(config), InvalidParameter);
    }

    TEST_CASE("larger horizon produces the larger frozen partition") {
        ProjectConfig config = default_config();
        config.N = 3;
        const DesignArtifacts art = build_design(config);
        CHECK(art.law.regions.size() == 15);
    }
}
