#include "obsgram/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "obsgram/rng.hpp"

namespace obsgram {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

/// Index-deterministic parallel map: fn(k) is called exactly once for every
/// k in [0, count) and may only touch slot k of its output, so the result
/// never depends on the number of workers.
void parallel_for(int count, const std::function<void(int)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int k = w; k < count; k += workers) fn(k);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace

MetricStats summarize_metric(std::vector<double> values) {
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
    }
    MetricStats stats;
    if (finite.empty()) {
        const double inf = std::numeric_limits<double>::infinity();
        stats = {inf, inf, inf, inf, inf, inf};
        return stats;
    }
    std::sort(finite.begin(), finite.end());
    stats.median = quantile_sorted(finite, 0.50);
    stats.q25 = quantile_sorted(finite, 0.25);
    stats.q75 = quantile_sorted(finite, 0.75);
    stats.p5 = quantile_sorted(finite, 0.05);
    stats.p95 = quantile_sorted(finite, 0.95);
    double sum = 0.0;
    for (double v : finite) sum += v;
    stats.mean = sum / static_cast<double>(finite.size());
    return stats;
}

EnsembleResult run_ensemble(const SystemModel& model, const Vector& x0,
                            const ControlSignal& u, double eps, const TimeGrid& grid, int M,
                            std::uint64_t base_seed) {
    if (M < 1) {
        throw std::invalid_argument("run_ensemble: sample count must be >= 1");
    }
    std::vector<GramianResult> slots(M);
    std::vector<char> ok(M, 0);
    parallel_for(M, [&](int k) {
        try {
            slots[k] = empirical_gramian(model, x0, u, eps, grid,
                                         SimMode::with_seed(derive_stream_seed(base_seed, k)));
            ok[k] = 1;
        } catch (const std::runtime_error&) {
            ok[k] = 0;  // diverged sample; counted below
        }
    });

    EnsembleResult result;
    result.gramians.reserve(M);
    for (int k = 0; k < M; ++k) {
        if (ok[k]) {
            result.gramians.push_back(std::move(slots[k]));
        }
    }
    const int failures = M - static_cast<int>(result.gramians.size());
    if (failures * 10 > M) {
        throw std::runtime_error("run_ensemble: " + std::to_string(failures) + " of " +
                                 std::to_string(M) + " samples failed to integrate");
    }

    EnsembleSummary& summary = result.summary;
    summary.failure_count = failures;
    summary.samples = static_cast<int>(result.gramians.size());
    std::vector<double> lmin, nu, kappa;
    const int n = model.n;
    Matrix sum_w = Matrix::Zero(n, n);
    Matrix sum_w2 = Matrix::Zero(n, n);
    for (const GramianResult& g : result.gramians) {
        lmin.push_back(g.eigenvalues(0));
        nu.push_back(g.nu);
        kappa.push_back(g.kappa);
        if (g.degenerate()) ++summary.degenerate_count;
        sum_w += g.W;
        sum_w2 += g.W.cwiseProduct(g.W);
    }
    summary.lambda_min = summarize_metric(std::move(lmin));
    summary.nu = summarize_metric(std::move(nu));
    summary.kappa = summarize_metric(std::move(kappa));
    const double count = std::max(1, summary.samples);
    summary.mean_W = sum_w / count;
    if (summary.samples > 1) {
        // Unbiased entrywise variance, then the standard error of the mean.
        const Matrix var = (sum_w2 - sum_w.cwiseProduct(sum_w) / count) / (count - 1.0);
        summary.se_W = (var.cwiseMax(0.0) / count).cwiseSqrt();
    } else {
        summary.se_W = Matrix::Zero(n, n);
    }
    return result;
}

std::vector<SweepRow> sweep(const std::string& system_name, const SystemParams& base_params,
                            const std::string& axis_param, const std::vector<double>& values,
                            const Vector& x0, const ControlSignal& u, double eps,
                            const TimeGrid& grid, int M, std::uint64_t base_seed) {
    if (values.empty()) {
        throw std::invalid_argument("sweep: empty value list");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("sweep: axis values must be finite");
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        SystemParams params = base_params;
        params.scalars[axis_param] = values[i];
        const SystemModel model = build_system(system_name, params);
        SweepRow row;
        row.value = values[i];
        row.summary =
            run_ensemble(model, x0, u, eps, grid, M, derive_stream_seed(base_seed, i)).summary;
        rows.push_back(std::move(row));
    }
    return rows;
}

DecompositionResult empirical_decomposition(const SystemModel& model, const Vector& x0,
                                            const ControlSignal& u, double eps,
                                            const TimeGrid& grid, int K,
                                            std::uint64_t base_seed) {
    if (K < 2) {
        throw std::invalid_argument("empirical_decomposition: need K >= 2 samples");
    }
    const int n = model.n;
    const int nodes = grid.node_count();

    // Running sums of the per-axis output moments and of the sample Gramians.
    std::vector<OutputTrajectory> sum_plus(n, OutputTrajectory::Zero(nodes, model.p));
    std::vector<OutputTrajectory> sum_minus(n, OutputTrajectory::Zero(nodes, model.p));
    std::vector<Vector> sum_diff_sq(n, Vector::Zero(nodes));
    Matrix sum_gramian = Matrix::Zero(n, n);

    for (int k = 0; k < K; ++k) {
        const SimMode mode = SimMode::with_seed(derive_stream_seed(base_seed, k));
        const std::vector<OutputTrajectory> y_pm = perturbed_outputs(model, x0, u, eps, grid, mode);
        sum_gramian += assemble_gramian(y_pm, eps, grid).W;
        for (int i = 0; i < n; ++i) {
            sum_plus[i] += y_pm[2 * i];
            sum_minus[i] += y_pm[2 * i + 1];
            const OutputTrajectory diff = y_pm[2 * i] - y_pm[2 * i + 1];
            sum_diff_sq[i] += diff.rowwise().squaredNorm();
        }
    }

    OutputEnsembleMoments moments;
    moments.mean_plus.reserve(n);
    moments.mean_minus.reserve(n);
    moments.diff_cov_trace.reserve(n);
    const double inv_k = 1.0 / K;
    for (int i = 0; i < n; ++i) {
        moments.mean_plus.push_back(sum_plus[i] * inv_k);
        moments.mean_minus.push_back(sum_minus[i] * inv_k);
        // Biased covariance of the paired difference: E_k[|d|^2] - |mean d|^2.
        const OutputTrajectory mean_diff = (sum_plus[i] - sum_minus[i]) * inv_k;
        moments.diff_cov_trace.push_back(sum_diff_sq[i] * inv_k -
                                         mean_diff.rowwise().squaredNorm());
    }

    DecompositionResult result;
    result.samples = K;
    auto [w_bar, w_hat] = decomposition_targets(moments, eps, grid);
    result.W_bar_emp = std::move(w_bar);
    result.W_hat_emp = std::move(w_hat);
    result.mean_sample_gramian = sum_gramian * inv_k;
    return result;
}

HeadingResult heading_experiment(double q, int M, const TimeGrid& grid,
                                 std::uint64_t base_seed) {
    SystemParams params;
    params.scalars["q"] = q;
    const SystemModel model = build_system("unicycle_sde", params);
    Vector x0 = Vector::Zero(4);
    x0(2) = std::numbers::pi / 4.0;  // heading 45 degrees, zero speed
    const ControlSignal u = ControlSignal::zero(2);

    HeadingResult result;
    result.angles_deg.reserve(M);
    for (int k = 0; k < M; ++k) {
        const WienerPath path = WienerPath::generate(model.q_w, grid.steps,
                                                     derive_stream_seed(base_seed, k));
        const StateTrajectory traj = integrate_sde(model, x0, u, grid, path);
        const double x = traj(grid.steps, 0);
        const double y = traj(grid.steps, 1);
        if (x == 0.0 && y == 0.0) {
            ++result.excluded;
            continue;
        }
        double deg = std::atan2(y, x) * 180.0 / std::numbers::pi;
        if (deg < 0.0) deg += 360.0;
        if (deg >= 360.0) deg = 0.0;
        result.angles_deg.push_back(deg);
        const int bin = std::min(35, static_cast<int>(deg / 10.0));
        ++result.bins[static_cast<std::size_t>(bin)];
    }
    return result;
}

}  // namespace obsgram
