#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "obsgram/bounds.hpp"

using namespace obsgram;

namespace {

// Static scalar system with a polynomial output, x' = 0.
SystemModel static_poly(std::function<double(double)> fn) {
    SystemModel sys;
    sys.name = "static_poly";
    sys.n = 1;
    sys.m = 0;
    sys.p = 1;
    sys.q_w = 0;
    sys.drift = [](const Vector&, const Vector&) { return Vector::Zero(1); };
    sys.diffusion = [](const Vector&, const Vector&) { return Matrix::Zero(1, 0); };
    sys.output = [fn](const Vector& x) { return Vector::Constant(1, fn(x(0))); };
    return sys;
}

Matrix random_spd(int n, std::uint32_t seed, double cond) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = dist(gen);
    // Orthogonalize columns, then assign a spectrum from 1 to cond.
    const Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector lambda(n);
    for (int i = 0; i < n; ++i) {
        lambda(i) = 1.0 + (cond - 1.0) * i / std::max(1, n - 1);
    }
    return q * lambda.asDiagonal() * q.transpose();
}

}  // namespace

TEST_CASE("jacobian_estimate recovers the identity for full static observation") {
    SystemModel sys;
    sys.name = "static_identity";
    sys.n = 2;
    sys.m = 0;
    sys.p = 2;
    sys.q_w = 0;
    sys.drift = [](const Vector&, const Vector&) { return Vector::Zero(2); };
    sys.diffusion = [](const Vector&, const Vector&) { return Matrix::Zero(2, 0); };
    sys.output = [](const Vector& x) { return x; };
    const TimeGrid g(1.0, 0.5);
    const auto y_pm = perturbed_outputs(sys, Vector::Zero(2), ControlSignal::zero(0), 0.01,
                                        g, SimMode::deterministic());
    const auto jac = jacobian_estimate(y_pm, 0.01);
    REQUIRE(jac.size() == std::size_t(g.node_count()));
    for (const Matrix& j : jac) {
        CHECK((j - Matrix::Identity(2, 2)).norm() < 1e-12);
    }
}

TEST_CASE("third-derivative stencil on polynomial oracles") {
    const TimeGrid g(1.0, 0.5);
    SUBCASE("cubic: D3 x^3 = 6 to high relative accuracy") {
        const SystemModel sys = static_poly([](double x) { return x * x * x; });
        const ThirdDerivativeReport r =
            third_derivative_sup(sys, Vector::Constant(1, 0.5), ControlSignal::zero(0), 0.1,
                                 g, 5, 0.01);
        CHECK(std::abs(r.gamma_sup - 6.0) < 1e-8 * 6.0);
    }
    SUBCASE("quartic: D3 x^4 = 24 x, sup over the segment at x0 + eps") {
        const SystemModel sys = static_poly([](double x) { return x * x * x * x; });
        const double x0 = 1.0, eps = 0.25;
        const ThirdDerivativeReport r = third_derivative_sup(
            sys, Vector::Constant(1, x0), ControlSignal::zero(0), eps, g, 5, 0.01);
        CHECK(r.gamma_sup == doctest::Approx(24.0 * (x0 + eps)).epsilon(1e-7));
    }
    SUBCASE("quadratic: third derivative vanishes") {
        const SystemModel sys = static_poly([](double x) { return 3.0 * x * x; });
        const ThirdDerivativeReport r = third_derivative_sup(
            sys, Vector::Constant(1, 0.3), ControlSignal::zero(0), 0.1, g, 5, 0.01);
        CHECK(r.gamma_sup < 1e-8);
    }
    SUBCASE("per-node values are recorded") {
        const SystemModel sys = static_poly([](double x) { return x * x * x; });
        const ThirdDerivativeReport r =
            third_derivative_sup(sys, Vector::Zero(1), ControlSignal::zero(0), 0.1, g, 5,
                                 0.01);
        REQUIRE(r.gamma_per_node.size() == g.node_count());
        CHECK(r.gamma_per_node.maxCoeff() == r.gamma_sup);
    }
    SUBCASE("invalid discretization rejected") {
        const SystemModel sys = static_poly([](double x) { return x; });
        CHECK_THROWS_AS(third_derivative_sup(sys, Vector::Zero(1), ControlSignal::zero(0),
                                             0.1, g, 1, 0.01),
                        std::invalid_argument);
        CHECK_THROWS_AS(third_derivative_sup(sys, Vector::Zero(1), ControlSignal::zero(0),
                                             0.1, g, 5, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("Gamma residual stays small for linear dynamics") {
    const SystemModel sys = build_system("oscillator", {});
    const TimeGrid g(10.0, 0.01);
    const ThirdDerivativeReport r = third_derivative_sup(
        sys, Vector::Zero(2), ControlSignal::zero(0), 0.01, g, 5, 0.001);
    CHECK(r.gamma_sup >= 0.0);
    CHECK(r.gamma_sup < 1e-4);  // integrator/stencil noise only
}

TEST_CASE("weak-observability bound on the oscillator") {
    const SystemModel sys = build_system("oscillator", {});
    const TimeGrid g(10.0, 0.001);
    const BoundReport r =
        weak_observability_bound(sys, Vector::Zero(2), ControlSignal::zero(0), 0.01, g);
    CHECK(r.bound_value >= 0.0);
    CHECK(r.bound_value < 1e-3);
    CHECK(r.sigma_min == doctest::Approx(4.728).epsilon(0.001));
    CHECK(r.weakly_observable);
    CHECK(r.interval_points == 5);
    CHECK(r.stencil_dx == doctest::Approx(0.001));  // eps/10 default
    CHECK(r.gramian.W.rows() == 2);
}

TEST_CASE("quadratic flows have a vanishing third derivative") {
    // sigma_nl's state map is exactly quadratic in the initial state
    // (x1(t) is linear in x1(0) and x0(t) collects 0.5 x1(0)^2 terms), so
    // the stencil sees only integrator roundoff amplified by 1/dx^3.
    const SystemModel sys = build_system("sigma_nl", {});
    const TimeGrid g(5.0, 0.01);
    Vector x0(2);
    x0 << 0.0, 1.0;
    const ThirdDerivativeReport r =
        third_derivative_sup(sys, x0, ControlSignal::zero(0), 0.1, g, 5, 0.01);
    CHECK(r.gamma_sup < 1e-6);
}

TEST_CASE("trigonometric flows produce a strictly positive Gamma") {
    // The unicycle's position depends on cos/sin of the initial heading,
    // whose third derivative does not vanish.
    const SystemModel sys = build_system("unicycle_det");
    const Vector x0 = Vector::Zero(4);
    const ControlSignal u = default_control(sys);
    const TimeGrid g(5.0, 0.01);
    const ThirdDerivativeReport r = third_derivative_sup(sys, x0, u, 0.1, g, 5, 0.01);
    CHECK(r.gamma_sup > 1e-3);
    CHECK(std::isfinite(r.gamma_sup));
    SUBCASE("stable under interval refinement") {
        const ThirdDerivativeReport fine = third_derivative_sup(sys, x0, u, 0.1, g, 11, 0.01);
        CHECK(fine.gamma_sup == doctest::Approx(r.gamma_sup).epsilon(0.2));
    }
}

TEST_CASE("bound grows with eps when Gamma is genuine") {
    const SystemModel sys = build_system("unicycle_det");
    const Vector x0 = Vector::Zero(4);
    const ControlSignal u = default_control(sys);
    const TimeGrid g(2.0, 0.01);
    double last = -1.0;
    // With a real (eps-independent) third derivative the remainder scales
    // like eps^2, so widening the perturbation weakens the certificate.
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        const BoundReport r = weak_observability_bound(sys, x0, u, eps, g);
        CHECK(r.bound_value > last);
        last = r.bound_value;
    }
}

TEST_CASE("fisher_upper_bound") {
    Matrix dw(2, 2);
    dw << 2.0, 0.5, 0.5, 1.0;
    SUBCASE("identity noise returns the integrand") {
        CHECK((fisher_upper_bound(Matrix::Identity(2, 2), dw) - dw).norm() < 1e-14);
    }
    SUBCASE("scalar scaling") {
        const Matrix b = fisher_upper_bound(4.0 * Matrix::Identity(2, 2), dw);
        CHECK((b - 0.25 * dw).norm() < 1e-14);
    }
    SUBCASE("singular R rejected") {
        Matrix r = Matrix::Zero(2, 2);
        r(0, 0) = 1.0;
        CHECK_THROWS_AS(fisher_upper_bound(r, dw), std::invalid_argument);
    }
}

TEST_CASE("fisher_condition_bounds") {
    Matrix dw(2, 2);
    dw << 3.0, 0.0, 0.0, 1.0;  // cond 3
    SUBCASE("unit-condition noise collapses the sandwich") {
        const auto [lo, hi] = fisher_condition_bounds(2.0 * Matrix::Identity(2, 2), dw);
        CHECK(lo == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(hi == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(hi - lo <= 1e-8 * hi);
    }
    SUBCASE("known interval") {
        Matrix r = Matrix::Identity(2, 2);
        r(0, 0) = 10.0;  // cond 10
        const auto [lo, hi] = fisher_condition_bounds(r, Matrix::Identity(2, 2));
        CHECK(lo == doctest::Approx(1.0));
        CHECK(hi == doctest::Approx(10.0));
    }
    SUBCASE("singular integrand gives infinite bounds") {
        Matrix sing = Matrix::Zero(2, 2);
        sing(0, 0) = 1.0;
        const auto [lo, hi] = fisher_condition_bounds(Matrix::Identity(2, 2), sing);
        CHECK(std::isinf(lo));
        CHECK(std::isinf(hi));
    }
}

TEST_CASE("Fisher bounds hold on a linear-Gaussian instance") {
    // For y = C e^{At} x0 + noise, the Fisher information about x0 from one
    // sample at time t is F(t) = e^{A^T t} C^T R^{-1} C e^{At}; the Gramian
    // integrand at the same time upper-bounds it after scaling by
    // sigma_max(R^{-1}).
    Matrix a(2, 2);
    a << -0.4, 1.0, -1.0, -0.4;
    Matrix c(1, 2);
    c << 1.0, 0.5;
    const Matrix r = random_spd(1, 3, 4.0);
    for (double t : {0.5, 1.0, 2.0}) {
        const Matrix phi = mat_exp(a * t);
        const Matrix f = phi.transpose() * c.transpose() * r.inverse() * c * phi;
        const Matrix dw = phi.transpose() * c.transpose() * c * phi;
        const Matrix bound = fisher_upper_bound(r, dw);
        const SymEigResult diff = sym_eig(Matrix(bound - f));
        CHECK(diff.values(0) >= -1e-10 * std::max(1.0, spectral_norm(bound)));
    }
}
