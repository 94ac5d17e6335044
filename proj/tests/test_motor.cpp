#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "empc/errors.hpp"
#include "empc/motor.hpp"
#include "oracles.hpp"

using namespace empc;

namespace {

MotorParams bench_motor() {
    return MotorParams{8.32e-4, 2.45e-7, 3.10e-5, 4.1, 2.27e-3};
}

}  // namespace

TEST_SUITE("motor") {
    TEST_CASE("first-order reduction of the bench motor") {
        const FirstOrderModel fo = derive_first_order(bench_motor());

        // Closed forms recomputed here from the raw parameters.
        const double f_ref = 3.10e-5 + 8.32e-4 * 8.32e-4 / 4.1;
        CHECK(fo.f == doctest::Approx(f_ref).epsilon(1e-14));
        CHECK(fo.K == doctest::Approx(8.32e-4 / (4.1 * f_ref)).epsilon(1e-14));
        CHECK(fo.tau == doctest::Approx(2.45e-7 / f_ref).epsilon(1e-14));

        // Absolute values, pinned.
        CHECK(fo.f == doctest::Approx(3.1169e-5).epsilon(1e-4));
        CHECK(fo.K == doctest::Approx(6.511).epsilon(1e-3));
        CHECK(fo.tau == doctest::Approx(7.860e-3).epsilon(1e-3));
    }

    TEST_CASE("gain and time constant scale as expected") {
        MotorParams p = bench_motor();
        const FirstOrderModel base = derive_first_order(p);

        p.J *= 2.0;
        const FirstOrderModel heavier = derive_first_order(p);
        CHECK(heavier.tau == doctest::Approx(2.0 * base.tau).epsilon(1e-12));
        CHECK(heavier.K == doctest::Approx(base.K).epsilon(1e-12));

        MotorParams q = bench_motor();
        q.km = 0.0;  // no electromechanical coupling: gain collapses to zero
        const FirstOrderModel uncoupled = derive_first_order(q);
        CHECK(uncoupled.K == 0.0);
        CHECK(uncoupled.f == doctest::Approx(q.fm).epsilon(1e-14));
    }

    TEST_CASE("parameter validation") {
        MotorParams p = bench_motor();
        p.J = 0.0;
        CHECK_THROWS_AS(derive_first_order(p), InvalidParameter);
        p = bench_motor();
        p.Ra = -1.0;
        CHECK_THROWS_AS(derive_first_order(p), InvalidParameter);
        p = bench_motor();
        p.fm = 0.0;
        CHECK_THROWS_AS(derive_first_order(p), InvalidParameter);
        p = bench_motor();
        p.La = 0.0;
        CHECK_THROWS_AS(derive_first_order(p), InvalidParameter);
        p = bench_motor();
        p.km = -1e-6;
        CHECK_THROWS_AS(derive_first_order(p), InvalidParameter);
    }

    TEST_CASE("continuous-time position/speed state space") {
        const CtModel ct = build_ct_model(derive_first_order(bench_motor()));
        REQUIRE(ct.A.rows() == 2);
        REQUIRE(ct.A.cols() == 2);
        CHECK(ct.A(0, 0) == 0.0);
        CHECK(ct.A(0, 1) == 1.0);
        CHECK(ct.A(1, 0) == 0.0);
        CHECK(ct.A(1, 1) == doctest::Approx(-127.22).epsilon(1e-4));
        CHECK(ct.B(0) == 0.0);
        CHECK(ct.B(1) == doctest::Approx(828.3).epsilon(1e-3));
        // Speed is the measured output.
        CHECK(ct.C(0, 0) == 0.0);
        CHECK(ct.C(0, 1) == 1.0);
        CHECK(ct.D(0, 0) == 0.0);
    }

    TEST_CASE("zero-order-hold discretization against a series expm") {
        const CtModel ct = build_ct_model(derive_first_order(bench_motor()));
        const double Ts = 1e-3;
        const LtiModel d = discretize_zoh(ct, Ts);

        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(3, 3);
        block.topLeftCorner(2, 2) = ct.A;
        block.topRightCorner(2, 1) = ct.B;
        const Eigen::MatrixXd e = oracle::expm_series(block * Ts);

        CHECK((d.A - e.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((d.B - e.topRightCorner(2, 1)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(d.Ts == Ts);
        CHECK(d.C == ct.C);
        CHECK(d.D == ct.D);
    }

    TEST_CASE("discretization closed forms for the bench motor") {
        const FirstOrderModel fo = derive_first_order(bench_motor());
        const double Ts = 1e-3;
        const LtiModel d = discretize_zoh(build_ct_model(fo), Ts);
        const double a = std::exp(-Ts / fo.tau);

        CHECK(d.A(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(d.A(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(d.A(1, 1) == doctest::Approx(a).epsilon(1e-12));
        CHECK(d.A(0, 1) == doctest::Approx(fo.tau * (1.0 - a)).epsilon(1e-12));
        CHECK(d.B(1) == doctest::Approx(fo.K * (1.0 - a)).epsilon(1e-12));
        CHECK(d.B(0) == doctest::Approx(fo.K * (Ts - fo.tau * (1.0 - a))).epsilon(1e-12));

        // Pinned numbers for the default design.
        CHECK(d.A(1, 1) == doctest::Approx(0.880540165676).epsilon(1e-10));
        CHECK(d.B(1) == doctest::Approx(0.77775141).epsilon(1e-7));
        CHECK(d.B(0) == doctest::Approx(0.00039712).epsilon(1e-4));
    }

    TEST_CASE("discretization semigroup property") {
        const CtModel ct = build_ct_model(derive_first_order(bench_motor()));
        const LtiModel d1 = discretize_zoh(ct, 1e-3);
        const LtiModel d2 = discretize_zoh(ct, 2e-3);
        CHECK((d2.A - d1.A * d1.A).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((d2.B - (d1.A * d1.B + d1.B)).cwiseAbs().maxCoeff() < 1e-9);

        const LtiModel tiny = discretize_zoh(ct, 1e-9);
        CHECK((tiny.A - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);

        CHECK_THROWS_AS(discretize_zoh(ct, 0.0), InvalidParameter);
        CHECK_THROWS_AS(discretize_zoh(ct, -1e-3), InvalidParameter);
    }

    TEST_CASE("plant stepping") {
        const LtiModel d = discretize_zoh(build_ct_model(derive_first_order(bench_motor())), 1e-3);

        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
        const PlantStep rest = plant_step(d, zero, 0.0);
        CHECK(rest.x_next == zero);
        CHECK(rest.y(0) == 0.0);

        const PlantStep kick = plant_step(d, zero, 1.0);
        CHECK((kick.x_next - d.B).cwiseAbs().maxCoeff() == 0.0);

        std::mt19937 rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd x(2);
            x << oracle::uniform(rng, -5, 5), oracle::uniform(rng, -50, 50);
            const double u = oracle::uniform(rng, -24, 24);
            const double dist = oracle::uniform(rng, -10, 10);
            const double noise = oracle::uniform(rng, -1, 1);
            const PlantStep step = plant_step(d, x, u, dist, noise);
            CHECK((step.x_next - (d.A * x + d.B * (u + dist))).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(step.y(0) == doctest::Approx(x(1) + noise).epsilon(1e-14));

            // Scalar convenience overload matches the general one.
            Eigen::VectorXd uv(1), dv(1), nv(1);
            uv << u;
            dv << dist;
            nv << noise;
            const PlantStep general = plant_step(d, x, uv, dv, nv);
            CHECK(general.x_next == step.x_next);
            CHECK(general.y == step.y);
        }

        CHECK_THROWS_AS(plant_step(d, Eigen::VectorXd::Zero(3), 0.0), DimensionError);
        CHECK_THROWS_AS(plant_step(d, zero, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                                   Eigen::VectorXd::Zero(1)),
                        DimensionError);
    }
}
