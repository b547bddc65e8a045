#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "obsgram/systems.hpp"

namespace obsgram {

inline constexpr const char* kToolName = "obsgram";
inline constexpr const char* kToolVersion = "0.1.0";

/// Fully resolved run configuration. parse_config fills defaults
/// (dt = 1e-3, eps = 1e-2, seed = 0, samples = 500); t1 is required.
struct RunConfig {
    std::string command;  // gramian | bound | expected | stochtest |
                          // ensemble | sweep | decompose | headings
    std::string system_name;
    SystemParams system_params;

    std::optional<Vector> x0;  // defaults to the origin of the built system

    enum class ControlKind { registry_default, zero, constant, piecewise };
    ControlKind control_kind = ControlKind::registry_default;
    Vector control_value;                 // constant
    std::vector<double> control_times;    // piecewise
    std::vector<Vector> control_values;   // piecewise

    double eps = 1e-2;
    double t1 = 0.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    int samples = 500;
    std::string mode = "auto";  // auto | deterministic | stochastic

    std::optional<std::string> sweep_param;
    std::vector<double> sweep_values;

    int interval_points = 5;   // weak-observability stencil
    double stencil_dx = -1.0;  // <= 0 means eps/10

    std::string output_path;  // empty: write to the provided stream
    std::string format;       // csv | json; default depends on the command
};

/// Parses and validates a JSON config document. Schema violations throw
/// std::invalid_argument naming the offending field path.
RunConfig parse_config(const std::string& json_text);

/// Canonical single-line JSON echo of a resolved config; parsing it again
/// reproduces the config exactly.
std::string config_to_json(const RunConfig& config);

/// Shortest round-trip decimal form of a double (locale-independent);
/// non-finite values render as inf / -inf / nan.
std::string format_double(double value);

/// Executes the configured command and writes the artifact to
/// config.output_path (or to `artifact` when no path is set). Returns 0.
/// Validation problems throw std::invalid_argument; numeric failures throw
/// std::runtime_error — the CLI maps these to exit codes 1 and 2.
int run(const RunConfig& config, std::ostream& artifact);

}  // namespace obsgram
