#include "obsgram/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace obsgram {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    }
}

namespace {

// Pade order-13 numerator coefficients for exp; the denominator uses the same
// coefficients with alternating signs (q(x) = p(-x)).
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

Matrix pade13(const Matrix& a) {
    const Eigen::Index n = a.rows();
    const Matrix i = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u = a * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) +
                          kPade13[7] * a6 + kPade13[5] * a4 + kPade13[3] * a2 +
                          kPade13[1] * i);
    const Matrix v = a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
                     kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 +
                     kPade13[0] * i;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Matrix mat_exp(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("mat_exp: matrix must be square");
    }
    require_finite(m, "mat_exp");
    // theta_13: largest 1-norm for which the order-13 approximant reaches
    // double precision without scaling (Higham 2005).
    const double theta13 = 5.371920351148152;
    const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    }
    Matrix scaled = m / std::pow(2.0, squarings);
    Matrix e = pade13(scaled);
    for (int k = 0; k < squarings; ++k) {
        e = e * e;
    }
    return e;
}

SymEigResult sym_eig(const Matrix& s) {
    if (s.rows() != s.cols()) {
        throw std::invalid_argument("sym_eig: matrix must be square");
    }
    require_finite(s, "sym_eig");
    const double scale = std::max(1.0, s.norm());
    if ((s - s.transpose()).norm() > 1e-8 * scale) {
        throw std::invalid_argument("sym_eig: matrix is not symmetric");
    }
    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("sym_eig: eigendecomposition failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols()) {
        throw std::invalid_argument("kron_sum: both matrices must be square");
    }
    return kron(a, Matrix::Identity(b.rows(), b.rows())) +
           kron(Matrix::Identity(a.rows(), a.rows()), b);
}

Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Eigen::Index n) {
    if (v.size() != n * n) {
        throw std::invalid_argument("unvec: vector length must be n^2");
    }
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

int rank_with_tolerance(const Matrix& s, double tol) {
    const Vector lambda = sym_eig(s).values;
    const double lmax = lambda(lambda.size() - 1);
    const double scale = std::max(1.0, lmax);
    if (lambda(0) < -1e-10 * scale) {
        throw std::invalid_argument("rank_with_tolerance: matrix is not PSD");
    }
    const double threshold = tol * scale;
    int rank = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > threshold) ++rank;
    }
    return rank;
}

double spectral_norm(const Matrix& m) {
    require_finite(m, "spectral_norm");
    return m.jacobiSvd().singularValues()(0);
}

}  // namespace obsgram
