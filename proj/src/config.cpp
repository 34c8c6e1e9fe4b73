#include "qkd/config.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace qkd {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, const std::string& key, int line) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(line, "malformed number for key '" + key + "'");
    }
    if (used != v.size()) fail(line, "trailing characters after value of key '" + key + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        fail(line, "malformed integer for key '" + key + "'");
    }
    if (used != v.size()) fail(line, "trailing characters after value of key '" + key + "'");
    return out;
}

bool parse_flag(const std::string& v, const std::string& key, int line) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(line, "key '" + key + "' expects on/off");
}

}  // namespace

SourceModel RunConfig::source() const {
    return source_mode == SourceMode::MinimumUncertainty ? source_from_r(r) : source_from_v(V);
}

ChannelModel RunConfig::channel() const { return ChannelModel{eta, delta}; }

TimingConfig RunConfig::timing() const {
    TimingConfig t;
    t.dt_switch = dt_switch_s;
    t.dT_sample = dT_sample_s;
    t.symbol_rate = symbol_rate_hz;
    return t;
}

SecurityContext RunConfig::context() const { return make_context(source().V, channel(), attack); }

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool v_set = false, r_set = false;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (val.empty()) fail(line, "empty value for key '" + key + "'");

        if (key == "seed") {
            cfg.seed = parse_u64(val, key, line);
        } else if (key == "n_symbols") {
            cfg.n_symbols = static_cast<std::size_t>(parse_u64(val, key, line));
            if (cfg.n_symbols < 1) fail(line, "n_symbols must be positive");
        } else if (key == "V") {
            cfg.V = parse_double(val, key, line);
            v_set = true;
            if (!(cfg.V >= 1.0)) fail(line, "V must be >= 1");
        } else if (key == "r") {
            cfg.r = parse_double(val, key, line);
            r_set = true;
            if (cfg.r < 0.0) fail(line, "r must be nonnegative");
        } else if (key == "source_mode") {
            if (val == "effective_v") cfg.source_mode = SourceMode::EffectiveV;
            else if (val == "minimum_uncertainty") cfg.source_mode = SourceMode::MinimumUncertainty;
            else fail(line, "source_mode must be effective_v or minimum_uncertainty");
        } else if (key == "eta") {
            cfg.eta = parse_double(val, key, line);
            if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) fail(line, "eta out of range (0, 1]");
        } else if (key == "delta") {
            cfg.delta = parse_double(val, key, line);
            if (cfg.delta < 0.0) fail(line, "delta must be nonnegative");
        } else if (key == "attack") {
            if (val == "collective") cfg.attack = Attack::Collective;
            else if (val == "individual") cfg.attack = Attack::Individual;
            else fail(line, "attack must be collective or individual");
        } else if (key == "symbol_rate_hz") {
            cfg.symbol_rate_hz = parse_double(val, key, line);
            if (!(cfg.symbol_rate_hz > 0.0)) fail(line, "symbol_rate_hz must be positive");
        } else if (key == "dt_switch_s") {
            cfg.dt_switch_s = parse_double(val, key, line);
            if (!(cfg.dt_switch_s > 0.0)) fail(line, "dt_switch_s must be positive");
        } else if (key == "dT_sample_s") {
            cfg.dT_sample_s = parse_double(val, key, line);
            if (!(cfg.dT_sample_s > 0.0)) fail(line, "dT_sample_s must be positive");
        } else if (key == "epsilon_pa") {
            cfg.epsilon_pa = parse_double(val, key, line);
            if (!(cfg.epsilon_pa > 0.0 && cfg.epsilon_pa < 1.0))
                fail(line, "epsilon_pa must lie in (0, 1)");
        } else if (key == "cascade_passes") {
            cfg.cascade_passes = static_cast<int>(parse_u64(val, key, line));
            if (cfg.cascade_passes < 1) fail(line, "cascade_passes must be positive");
        } else if (key == "post_selection") {
            cfg.post_selection = parse_flag(val, key, line);
        } else if (key == "eve_bound") {
            if (val == "mean") cfg.eve_bound = EveBound::Mean;
            else if (val == "max") cfg.eve_bound = EveBound::Max;
            else fail(line, "eve_bound must be mean or max");
        } else if (key == "transport") {
            if (val == "queue") cfg.transport = TransportKind::Queue;
            else if (val == "socket") cfg.transport = TransportKind::Socket;
            else fail(line, "transport must be queue or socket");
        } else if (key == "out_dir") {
            cfg.out_dir = val;
        } else {
            fail(line, "unknown key '" + key + "'");
        }
    }

    if (cfg.dt_switch_s < cfg.dT_sample_s)
        throw ConfigError("config: dt_switch_s must be >= dT_sample_s");
    if (cfg.source_mode == SourceMode::MinimumUncertainty) {
        if (!r_set) throw ConfigError("config: minimum_uncertainty mode requires r");
        cfg.V = variance_from_r(cfg.r);
    } else if (r_set && !v_set) {
        throw ConfigError("config: r given without source_mode = minimum_uncertainty");
    }
    if (2.0 * cfg.eta <= cfg.delta)
        std::cerr << "warning: 2*eta <= delta violates the secure-distillation condition\n";
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qkd
