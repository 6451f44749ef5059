#include "rslab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace rslab {

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::Relax: return "relax";
        case RunMode::Decay: return "decay";
        case RunMode::Evolve: return "evolve";
        case RunMode::Sweep: return "sweep";
        case RunMode::Verify: return "verify";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, key));
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"mode",
         [](RunConfig& c, const std::string& v, const std::string& k) {
             if (v == "relax") c.mode = RunMode::Relax;
             else if (v == "decay") c.mode = RunMode::Decay;
             else if (v == "evolve") c.mode = RunMode::Evolve;
             else if (v == "sweep") c.mode = RunMode::Sweep;
             else if (v == "verify") c.mode = RunMode::Verify;
             else throw ConfigError("key '" + k + "': unknown mode '" + v + "'");
         }},
        {"frac.alpha", [](RunConfig& c, const std::string& v, const std::string& k) { c.alpha = parse_double(v, k); }},
        {"frac.k", [](RunConfig& c, const std::string& v, const std::string& k) { c.k = parse_double(v, k); }},
        {"relax.mu", [](RunConfig& c, const std::string& v, const std::string& k) { c.mu = parse_double(v, k); }},
        {"relax.method",
         [](RunConfig& c, const std::string& v, const std::string& k) {
             if (v != "volterra" && v != "contour" && v != "both")
                 throw ConfigError("key '" + k + "': expected volterra|contour|both");
             c.relax_method = v;
         }},
        {"mesh.tmax", [](RunConfig& c, const std::string& v, const std::string& k) { c.t_max = parse_double(v, k); }},
        {"mesh.nodes", [](RunConfig& c, const std::string& v, const std::string& k) { c.nodes = std::size_t(parse_double(v, k)); }},
        {"mesh.grading", [](RunConfig& c, const std::string& v, const std::string& k) { c.grading = parse_double(v, k); }},
        {"grid.dim", [](RunConfig& c, const std::string& v, const std::string& k) { c.dim = int(parse_double(v, k)); }},
        {"grid.n", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid_points = std::size_t(parse_double(v, k)); }},
        {"grid.box", [](RunConfig& c, const std::string& v, const std::string& k) { c.box = parse_double(v, k); }},
        {"nl.sigma", [](RunConfig& c, const std::string& v, const std::string& k) { c.sigma = parse_double(v, k); }},
        {"nl.gamma", [](RunConfig& c, const std::string& v, const std::string& k) { c.gamma = parse_double(v, k); }},
        {"nl.rho", [](RunConfig& c, const std::string& v, const std::string& k) { c.rho = parse_double(v, k); }},
        {"nl.rho1", [](RunConfig& c, const std::string& v, const std::string& k) { c.rho1 = parse_double(v, k); }},
        {"nl.rho2", [](RunConfig& c, const std::string& v, const std::string& k) { c.rho2 = parse_double(v, k); }},
        {"nl.epsilon", [](RunConfig& c, const std::string& v, const std::string& k) { c.epsilon = parse_double(v, k); }},
        {"evolve.r", [](RunConfig& c, const std::string& v, const std::string& k) { c.r = parse_double(v, k); }},
        {"evolve.p", [](RunConfig& c, const std::string& v, const std::string& k) { c.p = parse_double(v, k); }},
        {"evolve.blow_threshold_factor",
         [](RunConfig& c, const std::string& v, const std::string& k) { c.blow_threshold_factor = parse_double(v, k); }},
        {"evolve.source",
         [](RunConfig& c, const std::string& v, const std::string& k) {
             if (v == "on" || v == "true" || v == "1") c.source = true;
             else if (v == "off" || v == "false" || v == "0") c.source = false;
             else throw ConfigError("key '" + k + "': expected on|off");
         }},
        {"evolve.snapshots", [](RunConfig& c, const std::string& v, const std::string& k) { c.snapshot_times = parse_list(v, k); }},
        {"data.kind",
         [](RunConfig& c, const std::string& v, const std::string& k) {
             if (v != "gaussian" && v != "power" && v != "odd")
                 throw ConfigError("key '" + k + "': expected gaussian|power|odd");
             c.data_kind = v;
         }},
        {"data.amplitude", [](RunConfig& c, const std::string& v, const std::string& k) { c.amplitude = parse_double(v, k); }},
        {"data.width", [](RunConfig& c, const std::string& v, const std::string& k) { c.width = parse_double(v, k); }},
        {"data.power_a", [](RunConfig& c, const std::string& v, const std::string& k) { c.power_a = parse_double(v, k); }},
        {"data.power_exponent", [](RunConfig& c, const std::string& v, const std::string& k) { c.power_exponent = parse_double(v, k); }},
        {"decay.times", [](RunConfig& c, const std::string& v, const std::string& k) { c.decay_times = parse_list(v, k); }},
        {"sweep.axis", [](RunConfig& c, const std::string& v, const std::string& k) { c.sweep_axis = parse_list(v, k); }},
        {"sweep.rho1", [](RunConfig& c, const std::string& v, const std::string& k) { c.sweep_rho1 = parse_double(v, k); }},
        {"sweep.blowup_amplitude", [](RunConfig& c, const std::string& v, const std::string& k) { c.blowup_amplitude = parse_double(v, k); }},
        {"sweep.c_op", [](RunConfig& c, const std::string& v, const std::string& k) { c.c_op = parse_double(v, k); }},
        {"sweep.amplitude_factor", [](RunConfig& c, const std::string& v, const std::string& k) { c.amplitude_factor = parse_double(v, k); }},
        {"sweep.threads", [](RunConfig& c, const std::string& v, const std::string& k) { c.threads = unsigned(parse_double(v, k)); }},
    };
    return table;
}

void set_key(RunConfig& config, const std::string& key, const std::string& value, int line) {
    const auto& table = setters();
    auto it = table.find(key);
    if (it == table.end()) {
        std::string where = line > 0 ? " (line " + std::to_string(line) + ")" : "";
        throw ConfigError("unknown key '" + key + "'" + where);
    }
    it->second(config, value, key);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void validate(const RunConfig& c) {
    if (!(c.alpha > 0.0 && c.alpha < 1.0))
        throw ConfigError("frac.alpha must lie in open (0,1)");
    if (c.k < 0.0) throw ConfigError("frac.k must be >= 0");
    if (c.mu < 0.0) throw ConfigError("relax.mu must be >= 0");
    if (!(c.t_max > 0.0)) throw ConfigError("mesh.tmax must be positive");
    if (c.nodes < 2) throw ConfigError("mesh.nodes must be at least 2");
    if (!(c.grading >= 1.0)) throw ConfigError("mesh.grading must be >= 1");
    if (c.dim != 1 && c.dim != 2) throw ConfigError("grid.dim must be 1 or 2");
    if (c.grid_points < 64 || !is_power_of_two(c.grid_points))
        throw ConfigError("grid.n must be a power of two >= 64");
    if (c.box < 0.0) throw ConfigError("grid.box must be >= 0 (0 = auto)");
    if (c.sigma > 0.0) throw ConfigError("nl.sigma must be <= 0");
    if (c.gamma > 0.0) throw ConfigError("nl.gamma must be <= 0");
    if (!(c.sigma + 2.0 * (c.gamma + 1.0) > 0.0))
        throw ConfigError("sigma+2(gamma+1)>0 violated");
    const bool system = c.rho1 > 0.0 || c.rho2 > 0.0;
    if (system) {
        if (!(c.rho1 >= 1.0 && c.rho2 >= 1.0 && c.rho1 * c.rho2 > 1.0))
            throw ConfigError("system exponents need rho1, rho2 >= 1 and rho1*rho2 > 1");
    } else if (c.mode == RunMode::Evolve && !(c.rho > 1.0)) {
        throw ConfigError("nl.rho must exceed 1");
    }
    if (c.epsilon < 0.0) throw ConfigError("nl.epsilon must be >= 0");
    if (c.mode == RunMode::Evolve || c.mode == RunMode::Sweep) {
        if (!(c.r > 1.0)) throw ConfigError("evolve.r must exceed 1");
        if (!(c.p > c.r)) throw ConfigError("evolve.p must exceed evolve.r");
        if (!(0.5 * c.dim * (1.0 / c.r - 1.0 / c.p) < 1.0))
            throw ConfigError("admissible triplet requires N/2(1/r-1/p) < 1");
    }
    if (!(c.blow_threshold_factor > 1.0))
        throw ConfigError("evolve.blow_threshold_factor must exceed 1");
    if (c.mode == RunMode::Decay) {
        if (c.decay_times.size() < 3) throw ConfigError("decay.times needs >= 3 entries");
    }
    if (c.sweep_rho1 < 0.0) throw ConfigError("sweep.rho1 must be >= 0");
    if (!(c.amplitude_factor > 0.0)) throw ConfigError("sweep.amplitude_factor must be positive");
    if (!(c.c_op > 0.0)) throw ConfigError("sweep.c_op must be positive");
    if (!(c.blowup_amplitude > 0.0)) throw ConfigError("sweep.blowup_amplitude must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        std::string s = trim(raw);
        const auto hash_pos = s.find('#');
        if (hash_pos != std::string::npos) s = trim(s.substr(0, hash_pos));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        set_key(config, key, value, line);
    }
    validate(config);
    return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "': expected key=value");
    set_key(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), -1);
    validate(config);
}

std::string serialize_config(const RunConfig& c) {
    std::string out;
    auto put = [&](const std::string& k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    };
    put("mode", to_string(c.mode));
    put("frac.alpha", fmt(c.alpha));
    put("frac.k", fmt(c.k));
    put("relax.mu", fmt(c.mu));
    put("relax.method", c.relax_method);
    put("mesh.tmax", fmt(c.t_max));
    put("mesh.nodes", fmt(double(c.nodes)));
    put("mesh.grading", fmt(c.grading));
    put("grid.dim", fmt(double(c.dim)));
    put("grid.n", fmt(double(c.grid_points)));
    put("grid.box", fmt(c.box));
    put("nl.sigma", fmt(c.sigma));
    put("nl.gamma", fmt(c.gamma));
    put("nl.rho", fmt(c.rho));
    put("nl.rho1", fmt(c.rho1));
    put("nl.rho2", fmt(c.rho2));
    put("nl.epsilon", fmt(c.epsilon));
    put("evolve.r", fmt(c.r));
    put("evolve.p", fmt(c.p));
    put("evolve.blow_threshold_factor", fmt(c.blow_threshold_factor));
    put("evolve.source", c.source ? "on" : "off");
    if (!c.snapshot_times.empty()) put("evolve.snapshots", fmt(c.snapshot_times));
    put("data.kind", c.data_kind);
    put("data.amplitude", fmt(c.amplitude));
    put("data.width", fmt(c.width));
    put("data.power_a", fmt(c.power_a));
    put("data.power_exponent", fmt(c.power_exponent));
    put("decay.times", fmt(c.decay_times));
    if (!c.sweep_axis.empty()) put("sweep.axis", fmt(c.sweep_axis));
    put("sweep.rho1", fmt(c.sweep_rho1));
    put("sweep.blowup_amplitude", fmt(c.blowup_amplitude));
    put("sweep.c_op", fmt(c.c_op));
    put("sweep.amplitude_factor", fmt(c.amplitude_factor));
    put("sweep.threads", fmt(double(c.threads)));
    return out;
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string text = serialize_config(config);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace rslab
