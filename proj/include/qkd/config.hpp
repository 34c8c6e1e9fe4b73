#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qkd/security.hpp"

namespace qkd {

enum class TransportKind { Queue, Socket };
enum class EveBound { Mean, Max };

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t n_symbols = 100000;
    SourceMode source_mode = SourceMode::EffectiveV;
    double V = 8.35;
    double r = 0.0;
    double eta = 0.8;
    double delta = 0.14;
    Attack attack = Attack::Collective;
    double symbol_rate_hz = 2e6;
    double dt_switch_s = 5e-3;
    double dT_sample_s = 5e-7;
    double epsilon_pa = 5.4210108624275222e-20;  // 2^-64
    int cascade_passes = 4;
    bool post_selection = true;
    EveBound eve_bound = EveBound::Mean;
    TransportKind transport = TransportKind::Queue;
    std::string out_dir = ".";

    SourceModel source() const;
    ChannelModel channel() const;
    TimingConfig timing() const;
    SecurityContext context() const;
};

// `key = value` lines, `#` comments. Unknown keys, malformed values and range
// violations raise ConfigError naming the key and line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace qkd
