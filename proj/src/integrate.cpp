#include "obsgram/integrate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "obsgram/rng.hpp"

namespace obsgram {

TimeGrid::TimeGrid(double t1_, double dt_) : t1(t1_), dt(dt_) {
    if (!(dt > 0.0) || !(t1 > 0.0)) {
        throw std::invalid_argument("TimeGrid: t1 and dt must be positive");
    }
    const double ratio = t1 / dt;
    steps = static_cast<int>(std::llround(ratio));
    if (steps < 1 || std::abs(steps * dt - t1) > 1e-9 * t1) {
        throw std::invalid_argument("TimeGrid: t1 must be an exact multiple of dt");
    }
}

WienerPath WienerPath::generate(int q_w, int steps, std::uint64_t seed) {
    WienerPath path;
    path.seed = seed;
    path.increments.resize(q_w, steps);
    GaussianStream stream(seed);
    for (int k = 0; k < steps; ++k) {
        for (int j = 0; j < q_w; ++j) {
            path.increments(j, k) = stream.normal();
        }
    }
    return path;
}

namespace {

void check_node(const Vector& x, int node) {
    if (!x.allFinite()) {
        throw std::runtime_error("integration diverged: non-finite state at node " +
                                 std::to_string(node));
    }
}

}  // namespace

StateTrajectory integrate_ode(const SystemModel& model, const Vector& x0,
                              const ControlSignal& u, const TimeGrid& grid) {
    if (x0.size() != model.n) {
        throw std::invalid_argument("integrate_ode: x0 dimension mismatch");
    }
    StateTrajectory traj(grid.node_count(), model.n);
    Vector x = x0;
    check_node(x, 0);
    traj.row(0) = x.transpose();
    const double dt = grid.dt;
    for (int k = 0; k < grid.steps; ++k) {
        const double t = grid.node(k);
        const Vector u0 = u(t);
        const Vector uh = u(t + 0.5 * dt);
        const Vector u1 = u(t + dt);
        const Vector k1 = model.drift(x, u0);
        const Vector k2 = model.drift(x + 0.5 * dt * k1, uh);
        const Vector k3 = model.drift(x + 0.5 * dt * k2, uh);
        const Vector k4 = model.drift(x + dt * k3, u1);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_node(x, k + 1);
        traj.row(k + 1) = x.transpose();
    }
    return traj;
}

StateTrajectory integrate_sde(const SystemModel& model, const Vector& x0,
                              const ControlSignal& u, const TimeGrid& grid,
                              const WienerPath& path) {
    if (x0.size() != model.n) {
        throw std::invalid_argument("integrate_sde: x0 dimension mismatch");
    }
    if (path.increments.rows() != model.q_w || path.increments.cols() != grid.steps) {
        throw std::invalid_argument("integrate_sde: Wiener path dimension mismatch");
    }
    StateTrajectory traj(grid.node_count(), model.n);
    Vector x = x0;
    check_node(x, 0);
    traj.row(0) = x.transpose();
    const double dt = grid.dt;
    const double sqrt_dt = std::sqrt(dt);
    for (int k = 0; k < grid.steps; ++k) {
        const Vector uk = u(grid.node(k));
        Vector next = x + model.drift(x, uk) * dt;
        if (model.q_w > 0) {
            next += model.diffusion(x, uk) * path.increments.col(k) * sqrt_dt;
        }
        x = std::move(next);
        check_node(x, k + 1);
        traj.row(k + 1) = x.transpose();
    }
    return traj;
}

OutputTrajectory output_of(const SystemModel& model, const StateTrajectory& traj) {
    OutputTrajectory out(traj.rows(), model.p);
    for (Eigen::Index k = 0; k < traj.rows(); ++k) {
        out.row(k) = model.output(traj.row(k).transpose()).transpose();
    }
    return out;
}

double trapezoid(const Vector& node_values, const TimeGrid& grid) {
    if (node_values.size() != grid.node_count()) {
        throw std::invalid_argument("trapezoid: node count mismatch");
    }
    double acc = 0.0;
    for (int k = 0; k < grid.node_count(); ++k) {
        acc += grid.quad_weight(k) * node_values(k);
    }
    return acc;
}

}  // namespace obsgram
