#include "obsgram/closed_form.hpp"

#include <cmath>
#include <stdexcept>

namespace obsgram {

Matrix deterministic_gramian(const Matrix& A, const Matrix& C, const TimeGrid& grid) {
    if (A.rows() != A.cols() || C.cols() != A.rows()) {
        throw std::invalid_argument("deterministic_gramian: dimension mismatch");
    }
    const Eigen::Index n = A.rows();
    const Matrix step = mat_exp(A * grid.dt);
    Matrix flow = Matrix::Identity(n, n);  // e^{A t_k}
    Matrix w = Matrix::Zero(n, n);
    for (int k = 0; k < grid.node_count(); ++k) {
        const Matrix cs = C * flow;
        w += grid.quad_weight(k) * (cs.transpose() * cs);
        flow = step * flow;
    }
    return 0.5 * (w + w.transpose());
}

namespace {

// One RK4 step of the Lyapunov ODE W' = A W + W A^T + G with constant G.
Matrix lyapunov_rk4_step(const Matrix& A, const Matrix& G, const Matrix& w, double dt) {
    auto f = [&](const Matrix& m) { return Matrix(A * m + m * A.transpose() + G); };
    const Matrix k1 = f(w);
    const Matrix k2 = f(w + 0.5 * dt * k1);
    const Matrix k3 = f(w + 0.5 * dt * k2);
    const Matrix k4 = f(w + dt * k3);
    return w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

ExpectedGramianReport ou_expected_gramian(const LinearAdditiveSpec& spec, double eps,
                                          const TimeGrid& grid) {
    spec.validate();
    if (!(eps > 0.0)) {
        throw std::invalid_argument("ou_expected_gramian: eps must be positive");
    }
    const Eigen::Index n = spec.A.rows();
    ExpectedGramianReport report;
    report.eps = eps;
    report.t1 = grid.t1;
    report.W_bar = deterministic_gramian(spec.A, spec.C, grid);

    // Propagate the state-noise covariance W_C and accumulate the output
    // variance integral of the unperturbed channel.
    const Matrix G = spec.Omega * spec.Omega.transpose();
    Matrix w_c = Matrix::Zero(n, n);
    double integral = 0.0;
    for (int k = 0; k < grid.node_count(); ++k) {
        integral += grid.quad_weight(k) * (spec.C * w_c * spec.C.transpose()).trace();
        if (k < grid.steps) {
            w_c = lyapunov_rk4_step(spec.A, G, w_c, grid.dt);
        }
    }
    const double inv2e2 = 1.0 / (2.0 * eps * eps);
    report.cov0_term = inv2e2 * (report.W_bar * spec.cov0).trace();
    report.noise_term = inv2e2 * integral;
    report.W_hat =
        (report.cov0_term + report.noise_term) * Matrix::Identity(n, n);
    report.E_W = report.W_bar + report.W_hat;
    return report;
}

ExpectedGramianReport bs_expected_gramian(const LinearMultiplicativeSpec& spec, double eps,
                                          const TimeGrid& grid) {
    spec.validate();
    if (!(eps > 0.0)) {
        throw std::invalid_argument("bs_expected_gramian: eps must be positive");
    }
    const Eigen::Index n = spec.A.rows();
    ExpectedGramianReport report;
    report.eps = eps;
    report.t1 = grid.t1;
    report.W_bar = deterministic_gramian(spec.A, spec.C, grid);

    Matrix q = kron_sum(spec.A, spec.A);
    const Matrix step_lin = mat_exp(q * grid.dt);  // noise-free second-moment flow
    for (const Matrix& omega : spec.Omegas) {
        q += kron(omega, omega);
    }
    const Matrix step_noisy = mat_exp(q * grid.dt);

    const Matrix cc = kron(spec.C, spec.C);
    const double inv_e2 = 1.0 / (eps * eps);

    // Second-moment coordinates, propagated node to node: the shared
    // initial-condition part (noisy minus noise-free, weighted 1/eps^2) and
    // one perturbation direction e_i e_i^T per axis.
    Vector m_noisy = vec(spec.second_moment0);
    Vector m_free = vec(Matrix(spec.mean0 * spec.mean0.transpose()));
    std::vector<Vector> pert_noisy(n), pert_free(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Matrix e = Matrix::Zero(n, n);
        e(i, i) = 1.0;
        pert_noisy[i] = vec(e);
        pert_free[i] = vec(e);
    }

    Vector integrals = Vector::Zero(n);
    for (int k = 0; k < grid.node_count(); ++k) {
        const double w = grid.quad_weight(k);
        const Vector shared = inv_e2 * (m_noisy - m_free);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector omega_i = cc * (shared + pert_noisy[i] - pert_free[i]);
            integrals(i) += w * unvec(omega_i, spec.C.rows()).trace();
        }
        if (k < grid.steps) {
            m_noisy = step_noisy * m_noisy;
            m_free = step_lin * m_free;
            for (Eigen::Index i = 0; i < n; ++i) {
                pert_noisy[i] = step_noisy * pert_noisy[i];
                pert_free[i] = step_lin * pert_free[i];
            }
        }
    }
    report.noise_integrals = integrals;
    report.W_hat = Matrix(0.5 * integrals.asDiagonal());
    report.E_W = report.W_bar + report.W_hat;
    return report;
}

StochasticObservabilityResult stochastic_observability_test(
    const LinearMultiplicativeSpec& spec, double t1, double dt, double rank_tol, double eps) {
    LinearMultiplicativeSpec origin = spec;
    const Eigen::Index n = spec.A.rows();
    origin.mean0 = Vector::Zero(n);
    origin.second_moment0 = Matrix::Zero(n, n);

    const TimeGrid grid(t1, dt);
    const ExpectedGramianReport report = bs_expected_gramian(origin, eps, grid);

    StochasticObservabilityResult result;
    result.E_W = report.E_W;
    result.eps_used = eps;
    result.t1 = t1;
    result.rank = rank_with_tolerance(report.E_W, rank_tol);
    result.observable = result.rank == n;
    if (result.observable) {
        result.beta = sym_eig(report.E_W).values(0) + 0.5 * sym_eig(report.W_hat).values(0);
    }
    return result;
}

std::pair<Matrix, Matrix> decomposition_targets(const OutputEnsembleMoments& moments,
                                                double eps, const TimeGrid& grid) {
    const int n = static_cast<int>(moments.mean_plus.size());
    if (moments.mean_minus.size() != moments.mean_plus.size() ||
        moments.diff_cov_trace.size() != moments.mean_plus.size() || n == 0) {
        throw std::invalid_argument("decomposition_targets: inconsistent moment sets");
    }
    const double inv4e2 = 1.0 / (4.0 * eps * eps);
    Matrix w_bar = Matrix::Zero(n, n);
    Matrix w_hat = Matrix::Zero(n, n);
    for (int k = 0; k < grid.node_count(); ++k) {
        const double w = grid.quad_weight(k);
        for (int i = 0; i < n; ++i) {
            const Vector di =
                (moments.mean_plus[i].row(k) - moments.mean_minus[i].row(k)).transpose();
            for (int j = 0; j <= i; ++j) {
                const Vector dj =
                    (moments.mean_plus[j].row(k) - moments.mean_minus[j].row(k)).transpose();
                w_bar(i, j) += w * di.dot(dj);
            }
            w_hat(i, i) += w * moments.diff_cov_trace[i](k);
        }
    }
    w_bar = Matrix(w_bar.selfadjointView<Eigen::Lower>());
    return {inv4e2 * w_bar, inv4e2 * w_hat};
}

}  // namespace obsgram
