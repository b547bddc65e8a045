#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "obsgram/linalg.hpp"

using namespace obsgram;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint32_t seed,
                     double scale = 1.0) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
    return m;
}

}  // namespace

TEST_CASE("mat_exp on closed-form cases") {
    SUBCASE("zero matrix") {
        const Matrix e = mat_exp(Matrix::Zero(3, 3));
        CHECK((e - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("diagonal") {
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = 1.0;
        d(1, 1) = -2.0;
        const Matrix e = mat_exp(d);
        CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-13));
        CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
        CHECK(std::abs(e(0, 1)) < 1e-15);
    }
    SUBCASE("rotation generator") {
        const double theta = 0.7;
        Matrix a(2, 2);
        a << 0.0, -theta, theta, 0.0;
        const Matrix e = mat_exp(a);
        CHECK(e(0, 0) == doctest::Approx(std::cos(theta)).epsilon(1e-13));
        CHECK(e(1, 0) == doctest::Approx(std::sin(theta)).epsilon(1e-13));
    }
    SUBCASE("nilpotent") {
        Matrix a(2, 2);
        a << 0.0, 1.0, 0.0, 0.0;
        const Matrix e = mat_exp(a);
        // The Pade evaluation leaves ulp-level residue even on exact cases.
        CHECK(e(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(e(1, 0)) < 1e-15);
    }
    SUBCASE("large norm exercises the squaring branch") {
        const double theta = 50.0;  // ||A|| far above the Pade threshold
        Matrix a(2, 2);
        a << 0.0, -theta, theta, 0.0;
        const Matrix e = mat_exp(a);
        CHECK(e(0, 0) == doctest::Approx(std::cos(theta)).epsilon(1e-10));
        CHECK(e(1, 0) == doctest::Approx(std::sin(theta)).epsilon(1e-10));
    }
}

TEST_CASE("mat_exp matches the Eigen reference on random matrices") {
    for (std::uint32_t seed : {11U, 12U, 13U, 14U}) {
        const Matrix a = random_matrix(5, 5, seed, 2.0);
        const Matrix ours = mat_exp(a);
        const Matrix ref = a.exp();  // independent implementation
        CHECK((ours - ref).norm() < 1e-11 * std::max(1.0, ref.norm()));
    }
}

TEST_CASE("mat_exp inverse property") {
    const Matrix a = random_matrix(4, 4, 99, 1.5);
    const Matrix prod = mat_exp(a) * mat_exp(-a);
    CHECK((prod - Matrix::Identity(4, 4)).norm() < 1e-11);
}

TEST_CASE("sym_eig") {
    SUBCASE("known 2x2") {
        Matrix s(2, 2);
        s << 2.0, 1.0, 1.0, 2.0;
        const SymEigResult r = sym_eig(s);
        CHECK(r.values(0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(r.values(1) == doctest::Approx(3.0).epsilon(1e-13));
        // Orthonormal eigenvectors reconstruct the input.
        const Matrix recon = r.vectors * r.values.asDiagonal() * r.vectors.transpose();
        CHECK((recon - s).norm() < 1e-13);
        const Matrix vtv = r.vectors.transpose() * r.vectors;
        CHECK((vtv - Matrix::Identity(2, 2)).norm() < 1e-13);
    }
    SUBCASE("eigenvalues ascend") {
        const Matrix g = random_matrix(6, 6, 7);
        const Matrix s = g + g.transpose();
        const SymEigResult r = sym_eig(s);
        for (Eigen::Index i = 1; i < r.values.size(); ++i) {
            CHECK(r.values(i) >= r.values(i - 1));
        }
    }
    SUBCASE("asymmetric input rejected") {
        Matrix s(2, 2);
        s << 1.0, 0.5, -0.5, 1.0;
        CHECK_THROWS_AS(sym_eig(s), std::invalid_argument);
    }
    SUBCASE("tiny asymmetry tolerated") {
        Matrix s(2, 2);
        s << 1.0, 0.5, 0.5 + 1e-12, 1.0;
        CHECK_NOTHROW(sym_eig(s));
    }
}

TEST_CASE("kron and kron_sum") {
    Matrix a(2, 2), b(2, 2);
    a << 1.0, 2.0, 3.0, 4.0;
    b << 0.0, 5.0, 6.0, 7.0;
    SUBCASE("hand-computed product") {
        const Matrix k = kron(a, b);
        REQUIRE(k.rows() == 4);
        REQUIRE(k.cols() == 4);
        CHECK(k(0, 1) == 5.0);    // a00 * b01
        CHECK(k(1, 0) == 6.0);    // a00 * b10
        CHECK(k(0, 3) == 10.0);   // a01 * b01
        CHECK(k(3, 3) == 28.0);   // a11 * b11
        CHECK(k(2, 1) == 15.0);   // a10 * b01
    }
    SUBCASE("kron_sum definition") {
        const Matrix ks = kron_sum(a, b);
        const Matrix expect =
            kron(a, Matrix::Identity(2, 2)) + kron(Matrix::Identity(2, 2), b);
        CHECK((ks - expect).norm() == 0.0);
    }
    SUBCASE("mixed-product identity vec(A X B) = (B^T kron A) vec(X)") {
        const Matrix x = random_matrix(2, 2, 3);
        const Vector lhs = vec(a * x * b);
        const Vector rhs = kron(b.transpose(), a) * vec(x);
        CHECK((lhs - rhs).norm() < 1e-12);
    }
}

TEST_CASE("vec and unvec round trip") {
    const Matrix m = random_matrix(3, 3, 21);
    const Vector v = vec(m);
    REQUIRE(v.size() == 9);
    // Column-stacking order.
    CHECK(v(0) == m(0, 0));
    CHECK(v(1) == m(1, 0));
    CHECK(v(3) == m(0, 1));
    CHECK((unvec(v, 3) - m).norm() == 0.0);
    CHECK_THROWS_AS(unvec(v, 2), std::invalid_argument);
}

TEST_CASE("rank_with_tolerance") {
    CHECK(rank_with_tolerance(Matrix::Identity(4, 4)) == 4);
    SUBCASE("numerically singular direction ignored") {
        Matrix s = Matrix::Identity(3, 3);
        s(2, 2) = 1e-12;
        CHECK(rank_with_tolerance(s) == 2);
    }
    SUBCASE("relative floor scales with the largest eigenvalue") {
        Matrix s = Matrix::Zero(2, 2);
        s(0, 0) = 1e12;
        s(1, 1) = 1.0;  // below the floor 1e-8 * 1e12
        CHECK(rank_with_tolerance(s) == 1);
    }
    SUBCASE("slightly negative eigenvalues are PSD noise") {
        Matrix s = Matrix::Identity(2, 2);
        s(1, 1) = -1e-13;
        CHECK(rank_with_tolerance(s) == 1);
    }
    SUBCASE("clearly indefinite input rejected") {
        Matrix s = Matrix::Identity(2, 2);
        s(1, 1) = -0.5;
        CHECK_THROWS_AS(rank_with_tolerance(s), std::invalid_argument);
    }
}

TEST_CASE("spectral_norm") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = -7.0;
    d(2, 2) = 0.5;
    CHECK(spectral_norm(d) == doctest::Approx(7.0).epsilon(1e-13));
    SUBCASE("rectangular") {
        Matrix m(1, 3);
        m << 3.0, 4.0, 0.0;
        CHECK(spectral_norm(m) == doctest::Approx(5.0).epsilon(1e-13));
    }
    SUBCASE("consistent with the Gram eigenvalue") {
        const Matrix m = random_matrix(4, 6, 5);
        const double s = spectral_norm(m);
        const SymEigResult g = sym_eig(Matrix(m * m.transpose()));
        CHECK(s * s == doctest::Approx(g.values(g.values.size() - 1)).epsilon(1e-10));
    }
}

TEST_CASE("require_finite") {
    Matrix m = Matrix::Zero(2, 2);
    CHECK_NOTHROW(require_finite(m, "m"));
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(require_finite(m, "m"), std::invalid_argument);
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(require_finite(m, "m"), std::invalid_argument);
}
