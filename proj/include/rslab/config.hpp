#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Flat key = value configuration with dotted namespaces. Unknown keys are
// hard errors; all module-level preconditions are validated at parse time.

namespace rslab {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class RunMode { Relax, Decay, Evolve, Sweep, Verify };

const char* to_string(RunMode m);

struct RunConfig {
    RunMode mode = RunMode::Relax;

    // frac.*
    double alpha = 0.5;
    double k = 1.0;

    // relax.*
    double mu = 1.0;
    std::string relax_method = "volterra";  // volterra | contour | both

    // mesh.*
    double t_max = 10.0;
    std::size_t nodes = 512;
    double grading = 2.0;

    // grid.*
    int dim = 1;
    std::size_t grid_points = 256;
    double box = 0.0;  // 0: auto-size 8 sqrt(<t_max>)

    // nl.*
    double sigma = 0.0;
    double gamma = 0.0;
    double rho = 2.0;
    double rho1 = 0.0;  // system mode when both rho1, rho2 > 0
    double rho2 = 0.0;
    double epsilon = 0.0;

    // evolve.*
    double r = 2.0;
    double p = 4.0;
    double blow_threshold_factor = 1e6;
    bool source = true;
    std::vector<double> snapshot_times;

    // data.*
    std::string data_kind = "gaussian";  // gaussian | power | odd
    double amplitude = 1.0;
    double width = 1.0;
    double power_a = 0.5;
    double power_exponent = -0.5;

    // decay.*
    std::vector<double> decay_times = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};

    // sweep.*
    std::vector<double> sweep_axis;
    double sweep_rho1 = 0.0;  // > 0 selects system mode, axis = rho2 values
    double blowup_amplitude = 3.0;
    double c_op = 1.0;
    double amplitude_factor = 0.1;
    unsigned threads = 0;
};

// Parses a key = value document ('#' comments). Throws ConfigError with the
// offending line/field.
RunConfig parse_config(const std::string& text);

// Applies a single "key=value" override.
void apply_override(RunConfig& config, const std::string& assignment);

// Canonical serialization; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

// FNV-1a hash of the canonical serialization.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace rslab
