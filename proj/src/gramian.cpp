#include "obsgram/gramian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "obsgram/rng.hpp"

namespace obsgram {

std::vector<OutputTrajectory> perturbed_outputs(const SystemModel& model, const Vector& x0,
                                                const ControlSignal& u, double eps,
                                                const TimeGrid& grid, const SimMode& mode) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("perturbed_outputs: eps must be positive");
    }
    if (x0.size() != model.n || !x0.allFinite()) {
        throw std::invalid_argument("perturbed_outputs: x0 must be a finite n-vector");
    }
    std::vector<OutputTrajectory> out;
    out.reserve(2 * model.n);
    for (int i = 0; i < model.n; ++i) {
        for (const double sign : {1.0, -1.0}) {
            Vector xi = x0;
            xi(i) += sign * eps;
            StateTrajectory traj;
            if (mode.stochastic) {
                const std::uint64_t stream_index = 2 * i + (sign > 0 ? 0 : 1);
                const WienerPath path = WienerPath::generate(
                    model.q_w, grid.steps, derive_stream_seed(mode.seed, stream_index));
                traj = integrate_sde(model, xi, u, grid, path);
            } else {
                traj = integrate_ode(model, xi, u, grid);
            }
            out.push_back(output_of(model, traj));
        }
    }
    return out;
}

Matrix phi_at_node(const std::vector<OutputTrajectory>& y_pm, int node) {
    const int n = static_cast<int>(y_pm.size()) / 2;
    const Eigen::Index p = y_pm.front().cols();
    Matrix phi(p, n);
    for (int i = 0; i < n; ++i) {
        phi.col(i) = (y_pm[2 * i].row(node) - y_pm[2 * i + 1].row(node)).transpose();
    }
    return phi;
}

Matrix gramian_integrand(const std::vector<OutputTrajectory>& y_pm, double eps, int node) {
    const Matrix phi = phi_at_node(y_pm, node);
    return (phi.transpose() * phi) / (4.0 * eps * eps);
}

namespace {

void attach_metrics(GramianResult& result) {
    result.W = 0.5 * (result.W + result.W.transpose()).eval();
    const SymEigResult eig = sym_eig(result.W);
    result.eigenvalues = eig.values;
    const double lmin = eig.values(0);
    const double lmax = eig.values(eig.values.size() - 1);
    result.sigma_min = lmin;
    if (lmin > 1e-8 * std::max(1.0, lmax)) {
        result.nu = 1.0 / lmin;
        result.kappa = lmax / lmin;
    } else {
        result.nu = std::numeric_limits<double>::infinity();
        result.kappa = std::numeric_limits<double>::infinity();
    }
}

}  // namespace

GramianResult assemble_gramian(const std::vector<OutputTrajectory>& y_pm, double eps,
                               const TimeGrid& grid) {
    if (y_pm.empty() || y_pm.size() % 2 != 0) {
        throw std::invalid_argument("assemble_gramian: need 2n output trajectories");
    }
    const int n = static_cast<int>(y_pm.size()) / 2;
    for (const OutputTrajectory& y : y_pm) {
        if (y.rows() != grid.node_count()) {
            throw std::invalid_argument("assemble_gramian: trajectory/grid node mismatch");
        }
    }
    GramianResult result;
    result.W = Matrix::Zero(n, n);
    for (int k = 0; k < grid.node_count(); ++k) {
        const Matrix phi = phi_at_node(y_pm, k);
        result.W += grid.quad_weight(k) * (phi.transpose() * phi);
    }
    result.W /= 4.0 * eps * eps;
    attach_metrics(result);
    result.meta.eps = eps;
    result.meta.t1 = grid.t1;
    result.meta.dt = grid.dt;
    return result;
}

GramianResult empirical_gramian(const SystemModel& model, const Vector& x0,
                                const ControlSignal& u, double eps, const TimeGrid& grid,
                                const SimMode& mode) {
    GramianResult result = assemble_gramian(perturbed_outputs(model, x0, u, eps, grid, mode),
                                            eps, grid);
    result.meta.system = model.name;
    result.meta.x0 = x0;
    result.meta.control = u.descriptor;
    if (mode.stochastic) {
        result.meta.seed = mode.seed;
    }
    return result;
}

}  // namespace obsgram
