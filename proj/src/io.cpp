#include "obsgram/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "obsgram/bounds.hpp"
#include "obsgram/closed_form.hpp"
#include "obsgram/ensemble.hpp"
#include "obsgram/gramian.hpp"

namespace obsgram {

using Json = nlohmann::ordered_json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw std::invalid_argument("config: field '" + path + "': " + message);
}

double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::uint64_t as_seed(const Json& j, const std::string& path) {
    if (!(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0))) {
        fail(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Vector as_vector(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
}

Matrix as_matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected an array");
    if (!j[0].is_array()) {
        // Array of numbers: a column vector.
        const Vector v = as_vector(j, path);
        return Matrix(v);
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    if (cols == 0) fail(path, "rows must be non-empty");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols) fail(row_path, "ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(j[r][c], row_path + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json matrix_to_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

const char* const kCommands[] = {"gramian", "bound",     "expected", "stochtest",
                                 "ensemble", "sweep",    "decompose", "headings"};

bool known_command(const std::string& name) {
    for (const char* c : kCommands) {
        if (name == c) return true;
    }
    return false;
}

std::string default_format(const std::string& command) {
    if (command == "ensemble" || command == "sweep" || command == "headings") return "csv";
    return "json";
}

RunConfig parse_config_json(const Json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
    static const char* const known_keys[] = {
        "command", "system", "x0",   "control",         "eps",        "t1",     "dt",
        "seed",    "samples", "mode", "sweep",           "interval_points", "stencil_dx",
        "output",  "format"};
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        for (const char* k : known_keys) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(key, "unknown field");
    }

    RunConfig config;
    if (!doc.contains("command")) fail("command", "required");
    config.command = as_string(doc["command"], "command");
    if (!known_command(config.command)) fail("command", "unknown command '" + config.command + "'");

    if (!doc.contains("system")) fail("system", "required");
    const Json& system = doc["system"];
    if (!system.is_object()) fail("system", "expected an object");
    if (!system.contains("name")) fail("system.name", "required");
    config.system_name = as_string(system["name"], "system.name");
    for (const auto& [key, value] : system.items()) {
        if (key == "name" || key == "params") continue;
        fail("system." + key, "unknown field");
    }
    if (system.contains("params")) {
        const Json& params = system["params"];
        if (!params.is_object()) fail("system.params", "expected an object");
        for (const auto& [key, value] : params.items()) {
            const std::string path = "system.params." + key;
            if (value.is_number()) {
                config.system_params.scalars[key] = value.get<double>();
            } else if (value.is_array()) {
                config.system_params.matrices[key] = as_matrix(value, path);
            } else {
                fail(path, "expected a number, vector, or matrix");
            }
        }
    }

    if (doc.contains("x0")) config.x0 = as_vector(doc["x0"], "x0");

    if (doc.contains("control")) {
        const Json& control = doc["control"];
        if (!control.is_object() || !control.contains("type")) {
            fail("control.type", "required");
        }
        const std::string type = as_string(control["type"], "control.type");
        if (type == "default") {
            config.control_kind = RunConfig::ControlKind::registry_default;
        } else if (type == "zero") {
            config.control_kind = RunConfig::ControlKind::zero;
        } else if (type == "constant") {
            config.control_kind = RunConfig::ControlKind::constant;
            if (!control.contains("value")) fail("control.value", "required for constant control");
            config.control_value = as_vector(control["value"], "control.value");
        } else if (type == "piecewise") {
            config.control_kind = RunConfig::ControlKind::piecewise;
            if (!control.contains("times") || !control.contains("values")) {
                fail("control", "piecewise control needs 'times' and 'values'");
            }
            const Vector times = as_vector(control["times"], "control.times");
            config.control_times.assign(times.data(), times.data() + times.size());
            const Json& values = control["values"];
            if (!values.is_array() || values.size() != config.control_times.size()) {
                fail("control.values", "must match 'times' in length");
            }
            for (std::size_t i = 0; i < values.size(); ++i) {
                config.control_values.push_back(
                    as_vector(values[i], "control.values[" + std::to_string(i) + "]"));
            }
        } else {
            fail("control.type", "expected default, zero, constant, or piecewise");
        }
    }

    if (!doc.contains("t1")) fail("t1", "required");
    config.t1 = as_number(doc["t1"], "t1");
    if (doc.contains("eps")) config.eps = as_number(doc["eps"], "eps");
    if (doc.contains("dt")) config.dt = as_number(doc["dt"], "dt");
    if (!(config.eps > 0.0)) fail("eps", "must be positive");
    if (!(config.t1 > 0.0)) fail("t1", "must be positive");
    if (!(config.dt > 0.0)) fail("dt", "must be positive");
    if (doc.contains("seed")) config.seed = as_seed(doc["seed"], "seed");
    if (doc.contains("samples")) {
        config.samples = as_int(doc["samples"], "samples");
        if (config.samples < 1) fail("samples", "must be >= 1");
    }
    if (doc.contains("mode")) {
        config.mode = as_string(doc["mode"], "mode");
        if (config.mode != "auto" && config.mode != "deterministic" &&
            config.mode != "stochastic") {
            fail("mode", "expected auto, deterministic, or stochastic");
        }
    }

    if (doc.contains("sweep")) {
        const Json& sw = doc["sweep"];
        if (!sw.is_object()) fail("sweep", "expected an object");
        if (!sw.contains("param")) fail("sweep.param", "required");
        config.sweep_param = as_string(sw["param"], "sweep.param");
        if (!sw.contains("values")) fail("sweep.values", "required");
        const Vector values = as_vector(sw["values"], "sweep.values");
        config.sweep_values.assign(values.data(), values.data() + values.size());
    }
    if (config.command == "sweep" && !config.sweep_param) fail("sweep.param", "required");

    if (doc.contains("interval_points")) {
        config.interval_points = as_int(doc["interval_points"], "interval_points");
        if (config.interval_points < 2) fail("interval_points", "must be >= 2");
    }
    if (doc.contains("stencil_dx")) {
        config.stencil_dx = as_number(doc["stencil_dx"], "stencil_dx");
        if (!(config.stencil_dx > 0.0)) fail("stencil_dx", "must be positive");
    }
    if (doc.contains("output")) config.output_path = as_string(doc["output"], "output");
    if (doc.contains("format")) {
        config.format = as_string(doc["format"], "format");
        if (config.format != "csv" && config.format != "json") {
            fail("format", "expected csv or json");
        }
    } else {
        config.format = default_format(config.command);
    }
    return config;
}

Json config_json(const RunConfig& config) {
    Json doc;
    doc["command"] = config.command;
    Json system;
    system["name"] = config.system_name;
    if (!config.system_params.scalars.empty() || !config.system_params.matrices.empty()) {
        Json params = Json::object();
        for (const auto& [key, value] : config.system_params.scalars) params[key] = value;
        for (const auto& [key, value] : config.system_params.matrices) {
            params[key] = matrix_to_json(value);
        }
        system["params"] = std::move(params);
    }
    doc["system"] = std::move(system);
    if (config.x0) doc["x0"] = vector_to_json(*config.x0);
    Json control;
    switch (config.control_kind) {
        case RunConfig::ControlKind::registry_default:
            control["type"] = "default";
            break;
        case RunConfig::ControlKind::zero:
            control["type"] = "zero";
            break;
        case RunConfig::ControlKind::constant:
            control["type"] = "constant";
            control["value"] = vector_to_json(config.control_value);
            break;
        case RunConfig::ControlKind::piecewise: {
            control["type"] = "piecewise";
            control["times"] = config.control_times;
            Json values = Json::array();
            for (const Vector& v : config.control_values) values.push_back(vector_to_json(v));
            control["values"] = std::move(values);
            break;
        }
    }
    doc["control"] = std::move(control);
    doc["eps"] = config.eps;
    doc["t1"] = config.t1;
    doc["dt"] = config.dt;
    doc["seed"] = config.seed;
    doc["samples"] = config.samples;
    doc["mode"] = config.mode;
    if (config.sweep_param) {
        Json sw;
        sw["param"] = *config.sweep_param;
        sw["values"] = config.sweep_values;
        doc["sweep"] = std::move(sw);
    }
    doc["interval_points"] = config.interval_points;
    if (config.stencil_dx > 0.0) doc["stencil_dx"] = config.stencil_dx;
    // The output destination is delivery metadata, not provenance: the same
    // computation written to two paths must produce byte-identical bodies,
    // so it never appears in the echoed config.
    doc["format"] = config.format;
    return doc;
}

// ---- command context ----------------------------------------------------

struct CommandContext {
    SystemModel model;
    Vector x0;
    ControlSignal control;
    SimMode sim_mode;
};

CommandContext make_context(const RunConfig& config) {
    CommandContext ctx;
    ctx.model = build_system(config.system_name, config.system_params);
    if (config.x0) {
        if (config.x0->size() != ctx.model.n) {
            fail("x0", "expected " + std::to_string(ctx.model.n) + " entries for system '" +
                           config.system_name + "'");
        }
        ctx.x0 = *config.x0;
    } else {
        ctx.x0 = Vector::Zero(ctx.model.n);
    }
    switch (config.control_kind) {
        case RunConfig::ControlKind::registry_default:
            ctx.control = default_control(ctx.model);
            break;
        case RunConfig::ControlKind::zero:
            ctx.control = ControlSignal::zero(ctx.model.m);
            break;
        case RunConfig::ControlKind::constant:
            if (ctx.model.m != config.control_value.size()) {
                fail("control.value", "dimension mismatch with system control");
            }
            ctx.control = ControlSignal::constant(config.control_value);
            break;
        case RunConfig::ControlKind::piecewise:
            ctx.control = ControlSignal::piecewise(config.control_times, config.control_values);
            if (ctx.control.dim != ctx.model.m) {
                fail("control.values", "dimension mismatch with system control");
            }
            break;
    }
    if (config.mode == "deterministic") {
        ctx.sim_mode = SimMode::deterministic();
    } else if (config.mode == "stochastic") {
        if (ctx.model.q_w == 0) fail("mode", "system has no noise channel");
        ctx.sim_mode = SimMode::with_seed(config.seed);
    } else {
        ctx.sim_mode = ctx.model.q_w > 0 ? SimMode::with_seed(config.seed)
                                         : SimMode::deterministic();
    }
    return ctx;
}

LinearAdditiveSpec additive_spec_from(const RunConfig& config) {
    const auto& mats = config.system_params.matrices;
    LinearAdditiveSpec spec;
    auto get = [&](const char* key) -> const Matrix& {
        auto it = mats.find(key);
        if (it == mats.end()) fail(std::string("system.params.") + key, "required");
        return it->second;
    };
    spec.A = get("A");
    spec.C = get("C");
    spec.Omega = get("Omega");
    const Eigen::Index n = spec.A.rows();
    spec.mean0 = mats.count("mean0") ? Vector(mats.at("mean0").col(0)) : Vector(Vector::Zero(n));
    spec.cov0 = mats.count("cov0") ? mats.at("cov0") : Matrix(Matrix::Zero(n, n));
    spec.validate();
    return spec;
}

LinearMultiplicativeSpec multiplicative_spec_from(const RunConfig& config) {
    const auto& mats = config.system_params.matrices;
    LinearMultiplicativeSpec spec;
    auto it_a = mats.find("A");
    auto it_c = mats.find("C");
    if (it_a == mats.end()) fail("system.params.A", "required");
    if (it_c == mats.end()) fail("system.params.C", "required");
    spec.A = it_a->second;
    spec.C = it_c->second;
    for (int j = 1;; ++j) {
        auto it = mats.find("Omega" + std::to_string(j));
        if (it == mats.end()) break;
        spec.Omegas.push_back(it->second);
    }
    if (spec.Omegas.empty()) fail("system.params.Omega1", "required");
    const Eigen::Index n = spec.A.rows();
    spec.mean0 = mats.count("mean0") ? Vector(mats.at("mean0").col(0)) : Vector(Vector::Zero(n));
    spec.second_moment0 = mats.count("second_moment0")
                              ? mats.at("second_moment0")
                              : Matrix(spec.mean0 * spec.mean0.transpose());
    spec.validate();
    return spec;
}

// ---- writers ------------------------------------------------------------

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void comment(const std::string& line) { out_ << "# " << line << '\n'; }
    void raw_row(const std::string& line) { out_ << line << '\n'; }

    void cell(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
    }
    void cell(double v) { cell(format_double(v)); }
    void cell(int v) { cell(std::to_string(v)); }
    void end_row() {
        out_ << '\n';
        first_ = true;
    }

  private:
    std::ostream& out_;
    bool first_ = true;
};

void csv_header(CsvWriter& csv, const RunConfig& config) {
    csv.comment(std::string(kToolName) + " " + kToolVersion);
    csv.comment("config: " + config_to_json(config));
}

void csv_matrix(CsvWriter& csv, const std::string& name, const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            csv.cell(name);
            csv.cell(std::to_string(r));
            csv.cell(std::to_string(c));
            csv.cell(m(r, c));
            csv.end_row();
        }
    }
}

void csv_scalar(CsvWriter& csv, const std::string& name, const std::string& value) {
    csv.cell(name);
    csv.cell("");
    csv.cell("");
    csv.cell(value);
    csv.end_row();
}

Json gramian_to_json(const GramianResult& g) {
    Json j;
    j["W"] = matrix_to_json(g.W);
    j["eigenvalues"] = vector_to_json(g.eigenvalues);
    j["sigma_min"] = g.sigma_min;
    j["nu"] = g.nu;        // +inf serializes as null
    j["kappa"] = g.kappa;  // likewise
    Json meta;
    meta["system"] = g.meta.system;
    meta["eps"] = g.meta.eps;
    meta["t1"] = g.meta.t1;
    meta["dt"] = g.meta.dt;
    meta["x0"] = vector_to_json(g.meta.x0);
    meta["control"] = g.meta.control;
    if (g.meta.seed) meta["seed"] = *g.meta.seed;
    j["metadata"] = std::move(meta);
    return j;
}

Json stats_to_json(const MetricStats& s) {
    Json j;
    j["median"] = s.median;
    j["q25"] = s.q25;
    j["q75"] = s.q75;
    j["p5"] = s.p5;
    j["p95"] = s.p95;
    j["mean"] = s.mean;
    return j;
}

Json summary_to_json(const EnsembleSummary& s) {
    Json j;
    j["samples"] = s.samples;
    j["degenerate_count"] = s.degenerate_count;
    j["failure_count"] = s.failure_count;
    j["lambda_min"] = stats_to_json(s.lambda_min);
    j["nu"] = stats_to_json(s.nu);
    j["kappa"] = stats_to_json(s.kappa);
    j["mean_W"] = matrix_to_json(s.mean_W);
    j["se_W"] = matrix_to_json(s.se_W);
    return j;
}

void csv_summary_row(CsvWriter& csv, double param_value, const std::string& metric,
                     const MetricStats& stats, int degenerate) {
    csv.cell(param_value);
    csv.cell(metric);
    csv.cell(stats.median);
    csv.cell(stats.q25);
    csv.cell(stats.q75);
    csv.cell(stats.p5);
    csv.cell(stats.p95);
    csv.cell(stats.mean);
    csv.cell(degenerate);
    csv.end_row();
}

// ---- command implementations ---------------------------------------------

void emit_envelope(std::ostream& out, const RunConfig& config, Json result) {
    Json doc;
    doc["tool"] = kToolName;
    doc["version"] = kToolVersion;
    doc["config"] = Json::parse(config_to_json(config));
    doc["result"] = std::move(result);
    out << doc.dump(2) << '\n';
}

void run_gramian(const RunConfig& config, std::ostream& out) {
    const CommandContext ctx = make_context(config);
    const TimeGrid grid(config.t1, config.dt);
    const GramianResult g =
        empirical_gramian(ctx.model, ctx.x0, ctx.control, config.eps, grid, ctx.sim_mode);
    if (config.format == "json") {
        emit_envelope(out, config, gramian_to_json(g));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("field,row,col,value");
    csv_matrix(csv, "W", g.W);
    for (Eigen::Index i = 0; i < g.eigenvalues.size(); ++i) {
        csv.cell("eigenvalue");
        csv.cell(std::to_string(i));
        csv.cell("");
        csv.cell(g.eigenvalues(i));
        csv.end_row();
    }
    csv_scalar(csv, "sigma_min", format_double(g.sigma_min));
    csv_scalar(csv, "nu", format_double(g.nu));
    csv_scalar(csv, "kappa", format_double(g.kappa));
}

void run_bound(const RunConfig& config, std::ostream& out) {
    const CommandContext ctx = make_context(config);
    const TimeGrid grid(config.t1, config.dt);
    const BoundReport report =
        weak_observability_bound(ctx.model, ctx.x0, ctx.control, config.eps, grid,
                                 config.interval_points, config.stencil_dx);
    if (config.format == "json") {
        Json j;
        j["bound_value"] = report.bound_value;
        j["gamma_sup"] = report.gamma_sup;
        j["jacobian_norm_sup"] = report.jacobian_norm_sup;
        j["sigma_min"] = report.sigma_min;
        j["weakly_observable"] = report.weakly_observable;
        j["interval_points"] = report.interval_points;
        j["stencil_dx"] = report.stencil_dx;
        j["gramian"] = gramian_to_json(report.gramian);
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("field,row,col,value");
    csv_scalar(csv, "bound_value", format_double(report.bound_value));
    csv_scalar(csv, "gamma_sup", format_double(report.gamma_sup));
    csv_scalar(csv, "jacobian_norm_sup", format_double(report.jacobian_norm_sup));
    csv_scalar(csv, "sigma_min", format_double(report.sigma_min));
    csv_scalar(csv, "weakly_observable", report.weakly_observable ? "true" : "false");
    csv_scalar(csv, "interval_points", std::to_string(report.interval_points));
    csv_scalar(csv, "stencil_dx", format_double(report.stencil_dx));
}

void run_expected(const RunConfig& config, std::ostream& out) {
    const TimeGrid grid(config.t1, config.dt);
    ExpectedGramianReport report;
    if (config.system_name == "ou_linear") {
        report = ou_expected_gramian(additive_spec_from(config), config.eps, grid);
    } else if (config.system_name == "bs_linear") {
        report = bs_expected_gramian(multiplicative_spec_from(config), config.eps, grid);
    } else {
        fail("system.name", "'expected' needs ou_linear or bs_linear");
    }
    if (config.format == "json") {
        Json j;
        j["W_bar"] = matrix_to_json(report.W_bar);
        j["W_hat"] = matrix_to_json(report.W_hat);
        j["E_W"] = matrix_to_json(report.E_W);
        j["eps"] = report.eps;
        j["t1"] = report.t1;
        if (config.system_name == "ou_linear") {
            j["cov0_term"] = report.cov0_term;
            j["noise_term"] = report.noise_term;
        } else {
            j["noise_integrals"] = vector_to_json(report.noise_integrals);
        }
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("field,row,col,value");
    csv_matrix(csv, "W_bar", report.W_bar);
    csv_matrix(csv, "W_hat", report.W_hat);
    csv_matrix(csv, "E_W", report.E_W);
    csv_scalar(csv, "eps", format_double(report.eps));
    if (config.system_name == "ou_linear") {
        csv_scalar(csv, "cov0_term", format_double(report.cov0_term));
        csv_scalar(csv, "noise_term", format_double(report.noise_term));
    }
}

void run_stochtest(const RunConfig& config, std::ostream& out) {
    if (config.system_name != "bs_linear") {
        fail("system.name", "'stochtest' needs bs_linear");
    }
    const StochasticObservabilityResult result =
        stochastic_observability_test(multiplicative_spec_from(config), config.t1, config.dt);
    if (config.format == "json") {
        Json j;
        j["observable"] = result.observable;
        j["rank"] = result.rank;
        j["beta"] = result.beta;
        j["E_W"] = matrix_to_json(result.E_W);
        j["eps_used"] = result.eps_used;
        j["t1"] = result.t1;
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("field,row,col,value");
    csv_scalar(csv, "observable", result.observable ? "true" : "false");
    csv_scalar(csv, "rank", std::to_string(result.rank));
    csv_scalar(csv, "beta", format_double(result.beta));
    csv_matrix(csv, "E_W", result.E_W);
}

void run_ensemble_cmd(const RunConfig& config, std::ostream& out) {
    const CommandContext ctx = make_context(config);
    const TimeGrid grid(config.t1, config.dt);
    const EnsembleResult result = run_ensemble(ctx.model, ctx.x0, ctx.control, config.eps, grid,
                                               config.samples, config.seed);
    if (config.format == "json") {
        Json samples = Json::array();
        for (std::size_t k = 0; k < result.gramians.size(); ++k) {
            const GramianResult& g = result.gramians[k];
            Json row;
            row["sample_index"] = k;
            row["lambda_min"] = g.eigenvalues(0);
            row["lambda_max"] = g.eigenvalues(g.eigenvalues.size() - 1);
            row["nu"] = g.nu;
            row["kappa"] = g.kappa;
            samples.push_back(std::move(row));
        }
        Json j;
        j["samples"] = std::move(samples);
        j["summary"] = summary_to_json(result.summary);
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("sample_index,lambda_min,lambda_max,nu,kappa");
    for (std::size_t k = 0; k < result.gramians.size(); ++k) {
        const GramianResult& g = result.gramians[k];
        csv.cell(static_cast<int>(k));
        csv.cell(g.eigenvalues(0));
        csv.cell(g.eigenvalues(g.eigenvalues.size() - 1));
        csv.cell(g.nu);
        csv.cell(g.kappa);
        csv.end_row();
    }
}

void run_sweep_cmd(const RunConfig& config, std::ostream& out) {
    const CommandContext ctx = make_context(config);
    const TimeGrid grid(config.t1, config.dt);
    const std::vector<SweepRow> rows =
        sweep(config.system_name, config.system_params, *config.sweep_param, config.sweep_values,
              ctx.x0, ctx.control, config.eps, grid, config.samples, config.seed);
    if (config.format == "json") {
        Json jrows = Json::array();
        for (const SweepRow& row : rows) {
            Json j;
            j["value"] = row.value;
            j["summary"] = summary_to_json(row.summary);
            jrows.push_back(std::move(j));
        }
        Json j;
        j["rows"] = std::move(jrows);
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("param_value,metric,median,q25,q75,p5,p95,mean,n_degenerate");
    for (const SweepRow& row : rows) {
        csv_summary_row(csv, row.value, "lambda_min", row.summary.lambda_min,
                        row.summary.degenerate_count);
        csv_summary_row(csv, row.value, "nu", row.summary.nu, row.summary.degenerate_count);
        csv_summary_row(csv, row.value, "kappa", row.summary.kappa,
                        row.summary.degenerate_count);
    }
}

void run_decompose(const RunConfig& config, std::ostream& out) {
    const CommandContext ctx = make_context(config);
    const TimeGrid grid(config.t1, config.dt);
    if (config.samples < 2) fail("samples", "decompose needs at least 2 samples");
    const DecompositionResult result = empirical_decomposition(
        ctx.model, ctx.x0, ctx.control, config.eps, grid, config.samples, config.seed);
    if (config.format == "json") {
        Json j;
        j["W_bar_emp"] = matrix_to_json(result.W_bar_emp);
        j["W_hat_emp"] = matrix_to_json(result.W_hat_emp);
        j["mean_sample_gramian"] = matrix_to_json(result.mean_sample_gramian);
        j["samples"] = result.samples;
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("matrix,row,col,value");
    csv_matrix(csv, "W_bar_emp", result.W_bar_emp);
    csv_matrix(csv, "W_hat_emp", result.W_hat_emp);
    csv_matrix(csv, "mean_sample_gramian", result.mean_sample_gramian);
}

void run_headings(const RunConfig& config, std::ostream& out) {
    if (config.system_name != "unicycle_sde") {
        fail("system.name", "'headings' needs unicycle_sde");
    }
    auto it = config.system_params.scalars.find("q");
    if (it == config.system_params.scalars.end()) fail("system.params.q", "required");
    const TimeGrid grid(config.t1, config.dt);
    const HeadingResult result = heading_experiment(it->second, config.samples, grid, config.seed);
    if (config.format == "json") {
        Json j;
        j["bins"] = result.bins;
        j["angles_deg"] = result.angles_deg;
        j["excluded"] = result.excluded;
        emit_envelope(out, config, std::move(j));
        return;
    }
    CsvWriter csv(out);
    csv_header(csv, config);
    csv.raw_row("kind,key,value");
    for (std::size_t b = 0; b < result.bins.size(); ++b) {
        csv.cell("bin");
        csv.cell(static_cast<int>(b * 10));
        csv.cell(result.bins[b]);
        csv.end_row();
    }
    for (std::size_t k = 0; k < result.angles_deg.size(); ++k) {
        csv.cell("angle");
        csv.cell(static_cast<int>(k));
        csv.cell(result.angles_deg[k]);
        csv.end_row();
    }
    csv_scalar(csv, "excluded", std::to_string(result.excluded));
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config_json(doc);
}

std::string config_to_json(const RunConfig& config) {
    return config_json(config).dump();
}

int run(const RunConfig& config, std::ostream& artifact) {
    std::ofstream file;
    std::ostream* out = &artifact;
    if (!config.output_path.empty()) {
        file.open(config.output_path, std::ios::binary);
        if (!file) {
            throw std::runtime_error("cannot open output file '" + config.output_path + "'");
        }
        out = &file;
    }
    if (config.command == "gramian") {
        run_gramian(config, *out);
    } else if (config.command == "bound") {
        run_bound(config, *out);
    } else if (config.command == "expected") {
        run_expected(config, *out);
    } else if (config.command == "stochtest") {
        run_stochtest(config, *out);
    } else if (config.command == "ensemble") {
        run_ensemble_cmd(config, *out);
    } else if (config.command == "sweep") {
        run_sweep_cmd(config, *out);
    } else if (config.command == "decompose") {
        run_decompose(config, *out);
    } else if (config.command == "headings") {
        run_headings(config, *out);
    } else {
        fail("command", "unknown command '" + config.command + "'");
    }
    out->flush();
    if (!*out) {
        throw std::runtime_error("failed writing artifact");
    }
    return 0;
}

}  // namespace obsgram
