#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "obsgram/integrate.hpp"
#include "obsgram/rng.hpp"
#include "obsgram/systems.hpp"

using namespace obsgram;

namespace {

// Scalar test system with injectable drift/diffusion.
SystemModel scalar_system(std::function<double(double)> drift_fn, double sigma = 0.0) {
    SystemModel sys;
    sys.name = "scalar";
    sys.n = 1;
    sys.m = 0;
    sys.p = 1;
    sys.q_w = sigma != 0.0 ? 1 : 0;
    sys.drift = [drift_fn](const Vector& x, const Vector&) {
        return Vector::Constant(1, drift_fn(x(0)));
    };
    sys.diffusion = [sigma](const Vector&, const Vector&) {
        return Matrix::Constant(1, sigma != 0.0 ? 1 : 0, sigma);
    };
    sys.output = [](const Vector& x) { return x; };
    return sys;
}

}  // namespace

TEST_CASE("TimeGrid") {
    const TimeGrid g(10.0, 0.01);
    CHECK(g.steps == 1000);
    CHECK(g.node_count() == 1001);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(1000) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(g.quad_weight(0) == 0.005);
    CHECK(g.quad_weight(500) == 0.01);
    CHECK(g.quad_weight(1000) == 0.005);
    SUBCASE("t1 must be a multiple of dt") {
        CHECK_THROWS_AS(TimeGrid(1.0, 0.3), std::invalid_argument);
        CHECK_THROWS_AS(TimeGrid(0.0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(TimeGrid(1.0, -0.1), std::invalid_argument);
        // 0.1 * 3 is inexact in binary yet clearly a valid grid.
        CHECK_NOTHROW(TimeGrid(0.3, 0.1));
    }
}

TEST_CASE("trapezoid integrates linear node data exactly") {
    const TimeGrid g(1.0, 0.125);
    Vector nodes(g.node_count());
    for (int k = 0; k < g.node_count(); ++k) nodes(k) = 3.0 * g.node(k);
    CHECK(trapezoid(nodes, g) == doctest::Approx(1.5).epsilon(1e-15));
    SUBCASE("quadratic error is O(dt^2)") {
        auto quad_err = [](double dt) {
            const TimeGrid grid(1.0, dt);
            Vector v(grid.node_count());
            for (int k = 0; k < grid.node_count(); ++k) v(k) = grid.node(k) * grid.node(k);
            return std::abs(trapezoid(v, grid) - 1.0 / 3.0);
        };
        const double e1 = quad_err(0.1);
        const double e2 = quad_err(0.05);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("RK4 accuracy") {
    SUBCASE("exponential decay to near machine precision") {
        const SystemModel sys = scalar_system([](double x) { return -x; });
        const TimeGrid g(1.0, 0.01);
        const StateTrajectory traj =
            integrate_ode(sys, Vector::Constant(1, 1.0), ControlSignal::zero(0), g);
        REQUIRE(traj.rows() == g.node_count());
        CHECK(traj(g.steps, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    }
    SUBCASE("fourth-order convergence") {
        auto err = [](double dt) {
            const SystemModel sys = scalar_system([](double x) { return -x; });
            const TimeGrid g(1.0, dt);
            const StateTrajectory traj =
                integrate_ode(sys, Vector::Constant(1, 1.0), ControlSignal::zero(0), g);
            return std::abs(traj(g.steps, 0) - std::exp(-1.0));
        };
        const double ratio = err(0.1) / err(0.05);
        CHECK(ratio > std::pow(2.0, 3.9));
        CHECK(ratio < std::pow(2.0, 4.5));
    }
    SUBCASE("time-dependent control sampled at half steps") {
        // x' = u(t) = 3 t^2 integrates exactly under classical RK4, but only
        // if the scheme samples the control at t, t + dt/2 and t + dt.
        SystemModel sys;
        sys.name = "ramp";
        sys.n = 1;
        sys.m = 1;
        sys.p = 1;
        sys.q_w = 0;
        sys.drift = [](const Vector&, const Vector& u) { return Vector::Constant(1, u(0)); };
        sys.diffusion = [](const Vector&, const Vector&) { return Matrix::Zero(1, 0); };
        sys.output = [](const Vector& x) { return x; };
        ControlSignal u{1, [](double t) { return Vector::Constant(1, 3.0 * t * t); },
                        "cubic ramp"};
        const TimeGrid g(1.0, 0.1);
        const StateTrajectory traj = integrate_ode(sys, Vector::Zero(1), u, g);
        CHECK(traj(g.steps, 0) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("oscillator energy is conserved to integrator order") {
        const SystemModel sys = build_system("oscillator", {});
        const TimeGrid g(10.0, 0.001);
        Vector x0(2);
        x0 << 1.0, 0.0;
        const StateTrajectory traj = integrate_ode(sys, x0, ControlSignal::zero(0), g);
        const double r2 = traj.row(g.steps).squaredNorm();
        CHECK(r2 == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("WienerPath") {
    const WienerPath p = WienerPath::generate(2, 5, 77);
    CHECK(p.increments.rows() == 2);
    CHECK(p.increments.cols() == 5);
    CHECK(p.seed == 77);
    SUBCASE("deterministic per seed") {
        const WienerPath q = WienerPath::generate(2, 5, 77);
        CHECK((p.increments - q.increments).norm() == 0.0);
        const WienerPath r = WienerPath::generate(2, 5, 78);
        CHECK((p.increments - r.increments).norm() != 0.0);
    }
    SUBCASE("time-major draw order") {
        GaussianStream s(77);
        bool match = true;
        for (int k = 0; k < 5; ++k) {
            for (int j = 0; j < 2; ++j) {
                match = match && (p.increments(j, k) == s.normal());
            }
        }
        CHECK(match);
    }
}

TEST_CASE("Euler-Maruyama") {
    SUBCASE("zero diffusion reduces to forward Euler bitwise") {
        const SystemModel sys = build_system("sigma_nl", {});
        const TimeGrid g(2.0, 0.01);
        Vector x0(2);
        x0 << 0.3, 1.0;
        const WienerPath empty = WienerPath::generate(0, g.steps, 5);
        const StateTrajectory em =
            integrate_sde(sys, x0, ControlSignal::zero(0), g, empty);
        // Hand-rolled forward Euler.
        Matrix ref(g.node_count(), 2);
        Vector x = x0;
        ref.row(0) = x;
        for (int k = 0; k < g.steps; ++k) {
            x = x + sys.drift(x, Vector()) * g.dt;
            ref.row(k + 1) = x;
        }
        CHECK((em - ref).norm() == 0.0);
    }
    SUBCASE("matches the scalar recursion bitwise") {
        const double sigma = 0.4;
        const SystemModel sys = scalar_system([](double x) { return -x; }, sigma);
        const TimeGrid g(1.0, 0.05);
        const WienerPath path = WienerPath::generate(1, g.steps, 2718);
        const StateTrajectory em =
            integrate_sde(sys, Vector::Constant(1, 1.0), ControlSignal::zero(0), g, path);
        const double sq = std::sqrt(g.dt);
        double x = 1.0;
        bool match = em(0, 0) == 1.0;
        for (int k = 0; k < g.steps; ++k) {
            x = x + (-x) * g.dt + sigma * path.increments(0, k) * sq;
            match = match && (em(k + 1, 0) == x);
        }
        CHECK(match);
    }
    SUBCASE("Ornstein-Uhlenbeck moments") {
        // dX = -X dt + sigma dW from X(0)=1: mean e^{-t}, variance
        // sigma^2 (1 - e^{-2t}) / 2.
        const double sigma = 0.5;
        const SystemModel sys = scalar_system([](double x) { return -x; }, sigma);
        const TimeGrid g(1.0, 0.005);
        const int M = 4000;
        double sum = 0.0, sumsq = 0.0;
        for (int m = 0; m < M; ++m) {
            const WienerPath path =
                WienerPath::generate(1, g.steps, derive_stream_seed(900, m));
            const StateTrajectory t =
                integrate_sde(sys, Vector::Constant(1, 1.0), ControlSignal::zero(0), g, path);
            sum += t(g.steps, 0);
            sumsq += t(g.steps, 0) * t(g.steps, 0);
        }
        const double mean = sum / M;
        const double var = sumsq / M - mean * mean;
        const double exact_mean = std::exp(-1.0);
        const double exact_var = sigma * sigma * (1.0 - std::exp(-2.0)) / 2.0;
        const double se_mean = std::sqrt(exact_var / M);
        CHECK(std::abs(mean - exact_mean) < 4.0 * se_mean + 5.0 * g.dt);
        CHECK(std::abs(var - exact_var) < 5.0 * exact_var * std::sqrt(2.0 / M) + 5.0 * g.dt);
    }
}

TEST_CASE("divergence is reported with the failing node") {
    // x' = x^2 from x(0)=3 blows up before t = 1.
    const SystemModel sys = scalar_system([](double x) { return x * x; });
    const TimeGrid g(1.0, 0.01);
    bool threw = false;
    try {
        integrate_ode(sys, Vector::Constant(1, 3.0), ControlSignal::zero(0), g);
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("output_of applies the output map node-wise") {
    const SystemModel sys = build_system("oscillator", {});
    const TimeGrid g(1.0, 0.25);
    Vector x0(2);
    x0 << 1.0, 0.0;
    const StateTrajectory traj = integrate_ode(sys, x0, ControlSignal::zero(0), g);
    const OutputTrajectory y = output_of(sys, traj);
    REQUIRE(y.rows() == g.node_count());
    REQUIRE(y.cols() == 1);
    for (int k = 0; k < g.node_count(); ++k) {
        CHECK(y(k, 0) == traj(k, 1));
    }
}
