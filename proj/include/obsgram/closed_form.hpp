#pragma once

#include <vector>

#include "obsgram/integrate.hpp"
#include "obsgram/linalg.hpp"
#include "obsgram/systems.hpp"

namespace obsgram {

/// Closed-form expected empirical Gramian E[W] = W_bar + W_hat for a linear
/// stochastic system: W_bar is the Gramian of the mean trajectories (the
/// deterministic observability Gramian of (A, C)) and W_hat is the diagonal
/// noise contribution.
struct ExpectedGramianReport {
    Matrix W_bar;
    Matrix W_hat;
    Matrix E_W;
    double eps = 0.0;
    double t1 = 0.0;

    // Additive-noise components: W_hat = (cov0_term + noise_term) * I with
    // cov0_term = tr(W_bar cov0)/(2 eps^2) and noise_term the accumulated
    // state-noise double integral /(2 eps^2).
    double cov0_term = 0.0;
    double noise_term = 0.0;

    // Multiplicative-noise components: per-axis output-variance integrals
    // before the 1/2 weight, W_hat = diag(noise_integrals) / 2.
    Vector noise_integrals;
};

/// Observability Gramian of the deterministic pair (A, C) on [0, t1]:
/// integral of e^{A^T t} C^T C e^{A t}, trapezoidal on the dt-grid with the
/// flow propagated by one-step matrix exponentials.
Matrix deterministic_gramian(const Matrix& A, const Matrix& C, const TimeGrid& grid);

/// Expected Gramian for additive (state-independent) noise:
///   E[W] = W_O + I tr(W_O Cov[X(0)])/(2 eps^2)
///             + I (1/(2 eps^2)) integral of tr(C W_C(t) C^T) dt,
/// where W_C solves the Lyapunov ODE W_C' = A W_C + W_C A^T + Omega Omega^T,
/// W_C(0) = 0.
ExpectedGramianReport ou_expected_gramian(const LinearAdditiveSpec& spec, double eps,
                                          const TimeGrid& grid);

/// Expected Gramian for multiplicative noise. Second moments propagate
/// through Q = A (+) A + sum_j Omega_j (x) Omega_j acting on vec(E[X X^T]);
/// the per-axis noise terms compare the noisy second moment of the
/// perturbed state against its noise-free counterpart (propagated by
/// A (+) A alone), measured through the output map.
ExpectedGramianReport bs_expected_gramian(const LinearMultiplicativeSpec& spec, double eps,
                                          const TimeGrid& grid);

/// Verdict of the expected-Gramian rank test for stochastic observability.
struct StochasticObservabilityResult {
    bool observable = false;
    int rank = 0;
    double beta = 0.0;  // lambda_min(E[W]) + lambda_min(W_hat)/2, when observable
    Matrix E_W;
    double eps_used = 0.0;
    double t1 = 0.0;
};

/// A linear multiplicative-noise system is stochastically observable exactly
/// when E[W] evaluated at a Dirac initial condition at the origin has full
/// rank. eps is immaterial there (the 1/eps^2 initial-moment terms vanish);
/// 1 is used and recorded.
StochasticObservabilityResult stochastic_observability_test(
    const LinearMultiplicativeSpec& spec, double t1 = 10.0, double dt = 1e-3,
    double rank_tol = 1e-8, double eps = 1.0);

/// Per-axis first and second output moments of the 2n perturbed ensembles,
/// as produced by Monte Carlo (or analytically): mean output trajectories
/// for the +i and -i perturbations and the node-wise total variance
/// (trace of the covariance) of the paired difference y^{+i} - y^{-i}.
struct OutputEnsembleMoments {
    std::vector<OutputTrajectory> mean_plus;
    std::vector<OutputTrajectory> mean_minus;
    std::vector<Vector> diff_cov_trace;
};

/// Assembles (W_bar, W_hat) from ensemble output moments:
///   W_bar_ij = 1/(4 eps^2) integral (m+_i - m-_i) . (m+_j - m-_j) dt,
///   W_hat_ii = 1/(4 eps^2) integral diff_cov_trace_i dt.
std::pair<Matrix, Matrix> decomposition_targets(const OutputEnsembleMoments& moments,
                                                double eps, const TimeGrid& grid);

}  // namespace obsgram
