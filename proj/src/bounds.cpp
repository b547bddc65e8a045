#include "obsgram/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace obsgram {

std::vector<Matrix> jacobian_estimate(const std::vector<OutputTrajectory>& y_pm, double eps) {
    if (y_pm.empty()) {
        throw std::invalid_argument("jacobian_estimate: empty trajectory set");
    }
    const int nodes = static_cast<int>(y_pm.front().rows());
    std::vector<Matrix> jac;
    jac.reserve(nodes);
    for (int k = 0; k < nodes; ++k) {
        jac.push_back(phi_at_node(y_pm, k) / (2.0 * eps));
    }
    return jac;
}

ThirdDerivativeReport third_derivative_sup(const SystemModel& model, const Vector& x0,
                                           const ControlSignal& u, double eps,
                                           const TimeGrid& grid, int interval_points,
                                           double dx) {
    if (interval_points < 2) {
        throw std::invalid_argument("third_derivative_sup: need at least 2 interval points");
    }
    if (!(dx > 0.0)) {
        throw std::invalid_argument("third_derivative_sup: dx must be positive");
    }
    ThirdDerivativeReport report;
    report.gamma_per_node = Vector::Zero(grid.node_count());
    for (int i = 0; i < model.n; ++i) {
        for (int j = 0; j < interval_points; ++j) {
            Vector base = x0;
            base(i) += -eps + 2.0 * eps * j / (interval_points - 1);
            // Four trajectories per stencil point, offset by +-dx and +-2dx
            // along the same axis.
            OutputTrajectory y[4];
            const double offsets[4] = {2.0 * dx, dx, -dx, -2.0 * dx};
            for (int s = 0; s < 4; ++s) {
                Vector xs = base;
                xs(i) += offsets[s];
                y[s] = output_of(model, integrate_ode(model, xs, u, grid));
            }
            for (int k = 0; k < grid.node_count(); ++k) {
                const Vector d3 = (0.5 * y[0].row(k) - y[1].row(k) + y[2].row(k) -
                                   0.5 * y[3].row(k)).transpose() / (dx * dx * dx);
                report.gamma_per_node(k) =
                    std::max(report.gamma_per_node(k), d3.lpNorm<1>());
            }
        }
    }
    report.gamma_sup = report.gamma_per_node.maxCoeff();
    return report;
}

BoundReport weak_observability_bound(const SystemModel& model, const Vector& x0,
                                     const ControlSignal& u, double eps, const TimeGrid& grid,
                                     int interval_points, double dx) {
    if (dx <= 0.0) {
        dx = eps / 10.0;
    }
    BoundReport report;
    report.interval_points = interval_points;
    report.stencil_dx = dx;

    const std::vector<OutputTrajectory> y_pm =
        perturbed_outputs(model, x0, u, eps, grid, SimMode::deterministic());
    report.gramian = assemble_gramian(y_pm, eps, grid);
    report.gramian.meta.system = model.name;
    report.gramian.meta.x0 = x0;
    report.gramian.meta.control = u.descriptor;
    report.sigma_min = report.gramian.sigma_min;

    const std::vector<Matrix> jac = jacobian_estimate(y_pm, eps);
    const ThirdDerivativeReport third =
        third_derivative_sup(model, x0, u, eps, grid, interval_points, dx);
    report.gamma_sup = third.gamma_sup;

    const double n = model.n;
    const double t1 = grid.t1;
    double bound = 0.0;
    double jac_sup = 0.0;
    for (int k = 0; k < grid.node_count(); ++k) {
        const double jnorm = spectral_norm(jac[k]);
        jac_sup = std::max(jac_sup, jnorm);
        const double gamma = third.gamma_per_node(k);
        const double node_bound = (std::sqrt(n) * eps * eps * t1 / 3.0) * jnorm * gamma +
                                  (n * eps * eps * eps * eps * t1 / 36.0) * gamma * gamma;
        bound = std::max(bound, node_bound);
    }
    report.jacobian_norm_sup = jac_sup;
    report.bound_value = bound;
    report.weakly_observable = report.sigma_min > report.bound_value;
    return report;
}

namespace {

// Condition number from an ascending eigenvalue vector; +infinity when the
// smallest eigenvalue sits at or below the relative rank floor.
double cond_from_eigs(const Vector& lambda) {
    const double lmin = lambda(0);
    const double lmax = lambda(lambda.size() - 1);
    if (lmin <= 1e-12 * std::max(1.0, lmax)) {
        return std::numeric_limits<double>::infinity();
    }
    return lmax / lmin;
}

}  // namespace

Matrix fisher_upper_bound(const Matrix& R, const Matrix& dW_dt) {
    const Vector lambda_r = sym_eig(R).values;
    if (lambda_r(0) <= 0.0) {
        throw std::invalid_argument("fisher_upper_bound: R must be symmetric positive definite");
    }
    // sigma_max(R^{-1}) = 1 / lambda_min(R) for SPD R.
    return dW_dt / lambda_r(0);
}

std::pair<double, double> fisher_condition_bounds(const Matrix& R, const Matrix& dW_dt) {
    const Vector lambda_r = sym_eig(R).values;
    if (lambda_r(0) <= 0.0) {
        throw std::invalid_argument(
            "fisher_condition_bounds: R must be symmetric positive definite");
    }
    const double cond_r = lambda_r(lambda_r.size() - 1) / lambda_r(0);
    const double cond_w = cond_from_eigs(sym_eig(dW_dt).values);
    if (!std::isfinite(cond_w)) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    return {std::max(1.0, cond_w / cond_r), cond_r * cond_w};
}

}  // namespace obsgram
