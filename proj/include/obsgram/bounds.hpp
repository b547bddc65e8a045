#pragma once

#include <utility>
#include <vector>

#include "obsgram/gramian.hpp"

namespace obsgram {

/// Node-wise worst-case third directional derivative of the output along
/// the perturbation axes, and its sup over the horizon.
struct ThirdDerivativeReport {
    Vector gamma_per_node;
    double gamma_sup = 0.0;
};

/// Result of the finite-difference weak-observability test: the Gramian's
/// smallest singular value must strictly exceed the Taylor-remainder bound
/// assembled from the output Jacobian and third-derivative estimates.
struct BoundReport {
    double bound_value = 0.0;
    double gamma_sup = 0.0;
    double jacobian_norm_sup = 0.0;
    double sigma_min = 0.0;
    bool weakly_observable = false;
    int interval_points = 0;
    double stencil_dx = 0.0;
    GramianResult gramian;
};

/// Per-node output-to-initial-state Jacobian estimates Phi(t_k) / (2 eps).
std::vector<Matrix> jacobian_estimate(const std::vector<OutputTrajectory>& y_pm, double eps);

/// Estimates D^3 y(x)(e_i, e_i, e_i) along each perturbation segment
/// [x0 - eps e_i, x0 + eps e_i], discretized into `interval_points` points.
/// At each point the third derivative is the four-trajectory stencil
///   (1/dx^3) (y(x+2dx e_i)/2 - y(x+dx e_i) + y(x-dx e_i) - y(x-2dx e_i)/2)
/// evaluated node-wise; gamma(t_k) is the max 1-norm over axes and points.
/// The stencil is exact for outputs polynomial of degree <= 4 in x0.
ThirdDerivativeReport third_derivative_sup(const SystemModel& model, const Vector& x0,
                                           const ControlSignal& u, double eps,
                                           const TimeGrid& grid, int interval_points,
                                           double dx);

/// Full weak-observability bound: at every node combine
///   (sqrt(n) eps^2 t1 / 3) ||dy/dx0||_2 gamma + (n eps^4 t1 / 36) gamma^2
/// and take the sup; verdict is sigma_min(W) > bound. Defaults: 5 interval
/// points, dx = eps/10.
BoundReport weak_observability_bound(const SystemModel& model, const Vector& x0,
                                     const ControlSignal& u, double eps, const TimeGrid& grid,
                                     int interval_points = 5, double dx = -1.0);

/// Fisher-information upper bound sigma_max(R^{-1}) * dW_dt for measurement
/// noise covariance R (SPD) and Gramian time-derivative dW_dt at a node.
Matrix fisher_upper_bound(const Matrix& R, const Matrix& dW_dt);

/// Sandwich bounds on the condition number of the Fisher information:
///   max{1, cond(dW_dt)/cond(R)} <= cond(F) <= cond(R) * cond(dW_dt).
/// Returns {lower, upper}; both are +infinity when dW_dt is singular.
std::pair<double, double> fisher_condition_bounds(const Matrix& R, const Matrix& dW_dt);

}  // namespace obsgram
