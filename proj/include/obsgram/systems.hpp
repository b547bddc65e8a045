#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "obsgram/linalg.hpp"

namespace obsgram {

/// Control input u(t). Carries a human-readable descriptor so results can
/// record how they were produced.
struct ControlSignal {
    int dim = 0;
    std::function<Vector(double)> fn;
    std::string descriptor;

    Vector operator()(double t) const { return fn(t); }

    static ControlSignal zero(int dim);
    static ControlSignal constant(const Vector& value);
    /// Piecewise-constant control: value `values[k]` applies on
    /// [times[k], times[k+1]) and the last value extends to infinity.
    /// `times` must be strictly increasing and start at 0.
    static ControlSignal piecewise(const std::vector<double>& times,
                                   const std::vector<Vector>& values);
};

/// A deterministic or stochastic system
///   dX = drift(X, u) dt + diffusion(X, u) dW,   y = output(X),
/// with state dimension n, control dimension m, output dimension p and
/// Wiener dimension q_w (0 for deterministic systems).
struct SystemModel {
    std::string name;
    int n = 0;
    int m = 0;
    int p = 0;
    int q_w = 0;
    std::function<Vector(const Vector&, const Vector&)> drift;
    std::function<Matrix(const Vector&, const Vector&)> diffusion;
    std::function<Vector(const Vector&)> output;
    std::map<std::string, double> params;

    bool deterministic() const { return q_w == 0; }
};

/// Parameter bag for build_system: scalar parameters (noise scales, weights,
/// flags) and matrix parameters (linear system data).
struct SystemParams {
    std::map<std::string, double> scalars;
    std::map<std::string, Matrix> matrices;
};

/// Linear system with additive (state-independent) noise,
///   dX = A X dt + Omega dW,  y = C X,
/// and a Gaussian-or-degenerate initial condition given by mean and
/// covariance.
struct LinearAdditiveSpec {
    Matrix A;
    Matrix C;
    Matrix Omega;
    Vector mean0;
    Matrix cov0;

    Matrix second_moment0() const { return cov0 + mean0 * mean0.transpose(); }
    /// Throws std::invalid_argument on dimension mismatch or a cov0 that is
    /// not symmetric PSD.
    void validate() const;
};

/// Linear system with multiplicative noise,
///   dX = A X dt + sum_j Omega_j X dw_j,  y = C X.
/// The initial condition enters through its first two moments only.
struct LinearMultiplicativeSpec {
    Matrix A;
    Matrix C;
    std::vector<Matrix> Omegas;
    Vector mean0;
    Matrix second_moment0;

    void validate() const;
};

/// Constructs one of the example systems by registry key:
///   oscillator, oscillator_unobs, unicycle_det, unicycle_sde, noise_affine,
///   noise_affine_tradeoff, sigma_nl, sigma_l, sigma_sde, ou_linear,
///   bs_linear.
/// Scalar params: q (noise scale, required by the stochastic nonlinear
/// systems, q >= 0), v (trade-off weight in [0,1]), noise_on_heading (0/1,
/// unicycle_sde only; default 0 puts the noise on the speed state).
/// Matrix params (ou_linear / bs_linear): A, C, Omega or Omega1..OmegaK,
/// optional mean0 / cov0 / second_moment0 as column vectors / matrices.
SystemModel build_system(const std::string& name, const SystemParams& params = {});

/// Registry default control for a system: u = 0.1 for the noise-affine
/// family, u = (0, 1) (acceleration channel) for the unicycle, zero
/// otherwise.
ControlSignal default_control(const SystemModel& model);

SystemModel linear_to_model(const LinearAdditiveSpec& spec);
SystemModel linear_to_model(const LinearMultiplicativeSpec& spec);

}  // namespace obsgram
