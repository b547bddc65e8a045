#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "obsgram/integrate.hpp"
#include "obsgram/linalg.hpp"
#include "obsgram/systems.hpp"

namespace obsgram {

/// How the perturbed trajectories are produced: deterministically (RK4 on
/// the drift) or as one Euler-Maruyama sample, with every perturbed
/// trajectory driven by its own derived Wiener stream.
struct SimMode {
    bool stochastic = false;
    std::uint64_t seed = 0;

    static SimMode deterministic() { return {false, 0}; }
    static SimMode with_seed(std::uint64_t seed) { return {true, seed}; }
};

struct GramianMetadata {
    std::string system;
    double eps = 0.0;
    double t1 = 0.0;
    double dt = 0.0;
    Vector x0;
    std::string control;
    std::optional<std::uint64_t> seed;
};

/// Empirical observability Gramian with its spectral observability metrics.
/// nu (local unobservability index) and kappa (estimation condition number)
/// are +infinity when lambda_min falls at or below the relative rank floor
/// 1e-8 * max(1, lambda_max).
struct GramianResult {
    Matrix W;
    Vector eigenvalues;  // ascending
    double sigma_min = 0.0;
    double nu = 0.0;
    double kappa = 0.0;
    GramianMetadata meta;

    bool degenerate() const { return !std::isfinite(nu); }
};

/// The 2n output trajectories y^{+1}, y^{-1}, ..., y^{+n}, y^{-n} of the
/// +-eps perturbed initial conditions x0 +- eps * e_i. In stochastic mode
/// trajectory (i, +) uses derived stream 2(i-1) and (i, -) stream 2(i-1)+1
/// of mode.seed.
std::vector<OutputTrajectory> perturbed_outputs(const SystemModel& model, const Vector& x0,
                                                const ControlSignal& u, double eps,
                                                const TimeGrid& grid, const SimMode& mode);

/// Difference matrix Phi(t_k) with columns y^{+i}(t_k) - y^{-i}(t_k).
Matrix phi_at_node(const std::vector<OutputTrajectory>& y_pm, int node);

/// Gramian integrand dW/dt at a node: Phi(t_k)^T Phi(t_k) / (4 eps^2).
Matrix gramian_integrand(const std::vector<OutputTrajectory>& y_pm, double eps, int node);

/// W = 1/(4 eps^2) * integral of Phi^T Phi over the grid (trapezoidal),
/// symmetrized, with eigen-metrics attached. Only grid/eps metadata is
/// filled in; callers add provenance.
GramianResult assemble_gramian(const std::vector<OutputTrajectory>& y_pm, double eps,
                               const TimeGrid& grid);

/// End-to-end empirical Gramian: perturb, simulate, assemble.
GramianResult empirical_gramian(const SystemModel& model, const Vector& x0,
                                const ControlSignal& u, double eps, const TimeGrid& grid,
                                const SimMode& mode = SimMode::deterministic());

}  // namespace obsgram
