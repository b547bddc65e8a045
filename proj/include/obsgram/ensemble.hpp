#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "obsgram/closed_form.hpp"
#include "obsgram/gramian.hpp"

namespace obsgram {

/// Distribution summary of one scalar metric over an ensemble. Quantiles use
/// linear interpolation between order statistics; infinite (degenerate)
/// samples are excluded, and when every sample is degenerate all fields are
/// +infinity.
struct MetricStats {
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    double mean = 0.0;
};

struct EnsembleSummary {
    MetricStats lambda_min;
    MetricStats nu;
    MetricStats kappa;
    int samples = 0;           // successfully integrated samples
    int degenerate_count = 0;  // rank-deficient Gramians among them
    int failure_count = 0;     // integration failures (excluded)
    Matrix mean_W;
    Matrix se_W;  // entrywise standard errors of mean_W
};

struct EnsembleResult {
    std::vector<GramianResult> gramians;
    EnsembleSummary summary;
};

/// MetricStats over raw values (infinities excluded as degenerate).
MetricStats summarize_metric(std::vector<double> values);

/// M seeded sample Gramians of a stochastic system; sample k uses the
/// derived seed (base_seed, k). Individual integration failures are skipped
/// and counted; more than 10% failures aborts with std::runtime_error.
EnsembleResult run_ensemble(const SystemModel& model, const Vector& x0,
                            const ControlSignal& u, double eps, const TimeGrid& grid, int M,
                            std::uint64_t base_seed);

struct SweepRow {
    double value = 0.0;
    EnsembleSummary summary;
};

/// One ensemble per parameter value, rebuilding the system with
/// base_params[axis_param] = value each time. Cell i derives its sample
/// seeds from (base_seed, i), so rows are independent of evaluation order.
std::vector<SweepRow> sweep(const std::string& system_name, const SystemParams& base_params,
                            const std::string& axis_param, const std::vector<double>& values,
                            const Vector& x0, const ControlSignal& u, double eps,
                            const TimeGrid& grid, int M, std::uint64_t base_seed);

/// Monte Carlo decomposition of the expected Gramian into mean-trajectory
/// and noise parts. K paired samples per perturbation; W_hat_emp uses the
/// biased (1/K) covariance of the paired differences y_k^{+i} - y_k^{-i},
/// which makes diag(mean_sample_gramian) = diag(W_bar_emp + W_hat_emp) an
/// algebraic identity.
struct DecompositionResult {
    Matrix W_bar_emp;
    Matrix W_hat_emp;
    Matrix mean_sample_gramian;
    int samples = 0;
};

DecompositionResult empirical_decomposition(const SystemModel& model, const Vector& x0,
                                            const ControlSignal& u, double eps,
                                            const TimeGrid& grid, int K,
                                            std::uint64_t base_seed);

/// Final-position headings of M uncontrolled unicycle runs started at the
/// origin with heading 45 degrees, zero speed, and speed noise q. Runs
/// ending exactly at the origin have no defined angle and are excluded.
struct HeadingResult {
    std::vector<double> angles_deg;   // in [0, 360)
    std::array<int, 36> bins{};       // 10-degree bins
    int excluded = 0;
};

HeadingResult heading_experiment(double q, int M, const TimeGrid& grid,
                                 std::uint64_t base_seed);

}  // namespace obsgram
