#pragma once

#include <Eigen/Dense>

namespace obsgram {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and an
/// orthonormal set of column eigenvectors.
struct SymEigResult {
    Vector values;
    Matrix vectors;
};

/// Throws std::invalid_argument when the matrix contains NaN or infinity.
void require_finite(const Matrix& m, const char* what);

/// Matrix exponential e^M by scaling-and-squaring with the degree-13 Pade
/// approximant. Relative accuracy around 1e-13 for well-scaled inputs.
Matrix mat_exp(const Matrix& m);

/// Symmetric eigendecomposition. The input is symmetrized as (S + S^T)/2
/// before factoring; inputs further than 1e-8 * max(1, ||S||) from symmetry
/// are rejected.
SymEigResult sym_eig(const Matrix& s);

/// Kronecker product A (x) B.
Matrix kron(const Matrix& a, const Matrix& b);

/// Kronecker sum A (+) B = A (x) I + I (x) B; both inputs must be square.
Matrix kron_sum(const Matrix& a, const Matrix& b);

/// Column-stacking vec operator.
Vector vec(const Matrix& m);

/// Inverse of vec for an n x n matrix; v must have length n^2.
Matrix unvec(const Vector& v, Eigen::Index n);

/// Number of eigenvalues of the symmetric PSD matrix s strictly above
/// tol * max(1, lambda_max). Eigenvalues below -1e-10 * max(1, lambda_max)
/// mean the input is not PSD and are rejected.
int rank_with_tolerance(const Matrix& s, double tol = 1e-8);

/// Largest singular value (2-norm) of a general rectangular matrix.
double spectral_norm(const Matrix& m);

}  // namespace obsgram
