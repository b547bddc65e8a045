// obsgram — empirical observability Gramians for deterministic and
// stochastic systems.
//
// Every subcommand reads a JSON config file and writes one artifact (CSV or
// JSON) to --out or stdout. Exit codes: 0 success, 1 configuration error,
// 2 numeric/runtime failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "obsgram/io.hpp"

namespace {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> eps;
    std::optional<double> t1;
    std::optional<double> dt;
    std::optional<int> samples;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_command(const std::string& command, const std::string& config_path,
                const CliOverrides& overrides) {
    obsgram::RunConfig config = obsgram::parse_config(read_file(config_path));
    if (config.command != command) {
        throw std::invalid_argument("config: field 'command': config says '" + config.command +
                                    "' but the '" + command + "' subcommand was invoked");
    }
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.eps) config.eps = *overrides.eps;
    if (overrides.t1) config.t1 = *overrides.t1;
    if (overrides.dt) config.dt = *overrides.dt;
    if (overrides.samples) config.samples = *overrides.samples;
    if (overrides.out) config.output_path = *overrides.out;
    if (overrides.format) {
        if (*overrides.format != "csv" && *overrides.format != "json") {
            throw std::invalid_argument("config: field 'format': expected csv or json");
        }
        config.format = *overrides.format;
    }
    return obsgram::run(config, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"empirical observability Gramian toolkit"};
    app.require_subcommand(1);

    const struct {
        const char* name;
        const char* help;
    } commands[] = {
        {"gramian", "empirical observability Gramian and spectral metrics"},
        {"bound", "finite-difference weak-observability bound"},
        {"expected", "closed-form expected Gramian of a linear stochastic system"},
        {"stochtest", "stochastic observability rank test"},
        {"ensemble", "Monte Carlo ensemble of sample Gramians"},
        {"sweep", "ensembles across a parameter grid"},
        {"decompose", "Monte Carlo mean/noise decomposition of E[W]"},
        {"headings", "final-heading histogram of the noisy unicycle"},
    };

    std::string config_path;
    CliOverrides overrides;
    std::string invoked;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("-c,--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", overrides.seed, "override config seed");
        sub->add_option("--eps", overrides.eps, "override perturbation size");
        sub->add_option("--t1", overrides.t1, "override horizon");
        sub->add_option("--dt", overrides.dt, "override step size");
        sub->add_option("--samples", overrides.samples, "override sample count");
        sub->add_option("--out", overrides.out, "artifact path (default: stdout)");
        sub->add_option("--format", overrides.format, "csv or json");
        sub->callback([&invoked, name = std::string(cmd.name)] { invoked = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage problems share the configuration-error exit code.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run_command(invoked, config_path, overrides);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
