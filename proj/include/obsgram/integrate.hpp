#pragma once

#include <cstdint>

#include "obsgram/linalg.hpp"
#include "obsgram/systems.hpp"

namespace obsgram {

/// Uniform integration grid on [0, t1]. t1 must be an exact multiple of dt
/// (to within rounding); nodes are t_k = k * dt for k = 0..steps.
struct TimeGrid {
    double t1 = 0.0;
    double dt = 0.0;
    int steps = 0;  // node_count - 1

    TimeGrid(double t1_, double dt_);

    int node_count() const { return steps + 1; }
    double node(int k) const { return k * dt; }
    /// Trapezoidal quadrature weight of node k.
    double quad_weight(int k) const { return (k == 0 || k == steps) ? 0.5 * dt : dt; }
};

/// Standard-normal increments Z_k driving one Euler-Maruyama trajectory:
/// one q_w-column per step, drawn from a seeded stream in time-major order.
struct WienerPath {
    Matrix increments;  // q_w x steps
    std::uint64_t seed = 0;

    static WienerPath generate(int q_w, int steps, std::uint64_t seed);
};

/// State trajectory sampled on the grid, one row per node (node_count x n).
using StateTrajectory = Matrix;
/// Output trajectory, one row per node (node_count x p).
using OutputTrajectory = Matrix;

/// Classical fixed-step 4th-order Runge-Kutta integration of the drift.
/// Throws std::runtime_error naming the first node at which the state
/// stops being finite.
StateTrajectory integrate_ode(const SystemModel& model, const Vector& x0,
                              const ControlSignal& u, const TimeGrid& grid);

/// Euler-Maruyama recursion
///   X_{k+1} = X_k + f(X_k, u_k) dt + sigma(X_k, u_k) Z_k sqrt(dt).
/// With zero diffusion this reduces to forward Euler exactly.
StateTrajectory integrate_sde(const SystemModel& model, const Vector& x0,
                              const ControlSignal& u, const TimeGrid& grid,
                              const WienerPath& path);

/// Node-wise application of the output map.
OutputTrajectory output_of(const SystemModel& model, const StateTrajectory& traj);

/// Trapezoidal integral of node samples over the grid.
double trapezoid(const Vector& node_values, const TimeGrid& grid);

}  // namespace obsgram
