#include "qkd/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qkd {

namespace {

constexpr std::uint64_t kCascadeSeedTag = 0x63617363;
constexpr std::uint64_t kPaSeedTag = 0x70617365;

const char* class_name(PointClass c) {
    switch (c) {
        case PointClass::ErrorFree: return "error_free";
        case PointClass::BitFlip: return "bit_flip";
        case PointClass::Insecure: return "insecure";
    }
    return "?";
}

const char* status_name(PipelineStatus s) {
    switch (s) {
        case PipelineStatus::Ok: return "ok";
        case PipelineStatus::Infeasible: return "infeasible";
        case PipelineStatus::Aborted: return "aborted";
    }
    return "?";
}

nlohmann::ordered_json stats_json(const PartyStats& s) {
    return {{"n_symbols", s.n_symbols}, {"n_sifted", s.n_sifted},
            {"n_kept", s.n_kept},       {"qber_est", s.qber_est},
            {"eve_bps", s.eve_bps},     {"leakage_bits", s.leakage_bits},
            {"corrections", s.corrections}, {"key_bits", s.key_bits}};
}

nlohmann::ordered_json table_json(const std::vector<StageRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const StageRow& r : rows)
        arr.push_back({{"stage", r.stage},
                       {"i_ab", r.i_ab},
                       {"eve_info", r.eve_info},
                       {"net", r.net},
                       {"retained_fraction", r.retained_fraction},
                       {"bits_per_symbol", r.bits_per_symbol},
                       {"rate_kbps", r.rate_kbps}});
    return arr;
}

}  // namespace

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned nib = 0;
        for (std::size_t j = 0; j < 4 && i + j < bits.size(); ++j)
            nib |= static_cast<unsigned>(bits[i + j] & 1) << (3 - j);
        out.push_back(digits[nib]);
    }
    return out;
}

std::string points_csv(const std::vector<SiftedPair>& pairs, const SelectionResult& sel,
                       Attack attack) {
    std::string out = "index,basis,Y_A,Y_B,kept,class,p,f,net_rate\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const bool kept = std::binary_search(sel.kept.begin(), sel.kept.end(),
                                             static_cast<std::uint32_t>(i));
        const PointAssessment& pa = sel.points[i];
        out += std::to_string(pairs[i].index);
        out += pairs[i].basis == Basis::X ? ",x," : ",y,";
        out += fmt_double(pairs[i].Y_A);
        out += ',';
        out += fmt_double(pairs[i].Y_B);
        out += kept ? ",1," : ",0,";
        out += class_name(sel.classes[i]);
        out += ',';
        out += fmt_double(pa.p);
        out += ',';
        out += fmt_double(pa.f);
        out += ',';
        out += fmt_double(pa.net(attack));
        out += '\n';
    }
    return out;
}

std::string boundary_csv(const SecurityContext& ctx, double y_a_min, double y_a_max,
                         double step) {
    std::string out = "y_A,y_B_threshold_collective,y_B_threshold_individual\n";
    const long n_steps = std::lround((y_a_max - y_a_min) / step);
    for (long k = 0; k <= n_steps; ++k) {
        const double y_a = y_a_min + static_cast<double>(k) * step;
        out += fmt_double(y_a);
        out += ',';
        if (const auto t = boundary(y_a, ctx, Attack::Collective)) out += fmt_double(*t);
        out += ',';
        if (const auto t = boundary(y_a, ctx, Attack::Individual)) out += fmt_double(*t);
        out += '\n';
    }
    return out;
}

std::string stage_csv(const std::vector<StageRow>& rows) {
    std::string out = "stage,i_ab,eve_info,net,retained_fraction,bits_per_symbol,rate_kbps\n";
    for (const StageRow& r : rows) {
        out += r.stage;
        for (const double v :
             {r.i_ab, r.eve_info, r.net, r.retained_fraction, r.bits_per_symbol, r.rate_kbps}) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string stage_text(const std::vector<StageRow>& rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %10s %10s %10s\n", "stage", "I_AB",
                  "eve", "net", "retained", "bits/sym", "kbit/s");
    std::string out = line;
    for (const StageRow& r : rows) {
        std::snprintf(line, sizeof line, "%-24s %8.3f %8.3f %8.3f %10.4f %10.4f %10.1f\n",
                      r.stage.c_str(), r.i_ab, r.eve_info, r.net, r.retained_fraction,
                      r.bits_per_symbol, r.rate_kbps);
        out += line;
    }
    return out;
}

PipelineResult run_offline_pipeline(const RunConfig& cfg) {
    PipelineResult res;
    const SecurityContext ctx = cfg.context();
    res.raw = ensemble_rates(ctx);

    const RunRecords rr = simulate_measurements(cfg.source(), cfg.channel(), cfg.timing(),
                                                cfg.n_symbols, cfg.seed);
    res.pairs = sift(rr.alice, rr.bob, ctx.V);
    res.n_sifted = res.pairs.size();
    res.selection = postselect(res.pairs, ctx, cfg.attack, DecisionRule::Joint);

    std::vector<std::uint32_t> kept = res.selection.kept;
    if (!cfg.post_selection) {
        kept.resize(res.pairs.size());
        for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = static_cast<std::uint32_t>(i);
    }
    res.n_kept = kept.size();

    double i_ab = 0.0, eve_sum = 0.0, eve_max = 0.0, net = 0.0, qber = 0.0;
    for (const std::uint32_t k : kept) {
        const PointAssessment& pa = res.selection.points[k];
        i_ab += pa.i_ab;
        const double ev = cfg.attack == Attack::Collective ? pa.chi : pa.i_ae;
        eve_sum += ev;
        eve_max = std::max(eve_max, ev);
        net += pa.net(cfg.attack);
        qber += pa.p;
    }
    if (!kept.empty()) {
        const double n = static_cast<double>(kept.size());
        res.ps_i_ab = i_ab / n;
        res.ps_eve = eve_sum / n;
        res.ps_net = net / n;
        res.qber_kept = qber / n;
    }

    StageInputs in;
    in.raw = res.raw;
    in.ps_i_ab = res.ps_i_ab;
    in.ps_eve = res.ps_eve;
    in.ps_net = res.ps_net;
    in.kept_over_sifted =
        res.n_sifted ? static_cast<double>(res.n_kept) / static_cast<double>(res.n_sifted) : 0.0;
    in.n_kept = res.n_kept;
    in.symbol_rate_hz = cfg.symbol_rate_hz;

    if (!cfg.post_selection && res.raw.net <= 0.0) {
        res.status = PipelineStatus::Infeasible;
        res.note = "raw ensemble net rate is nonpositive and post-selection is disabled; "
                   "no distillation attempted";
        res.table = stage_accounting(in);
        return res;
    }
    if (kept.empty()) {
        res.status = PipelineStatus::Infeasible;
        res.note = "post-selection kept no symbols";
        res.table = stage_accounting(in);
        return res;
    }

    std::vector<SiftedPair> kept_pairs;
    kept_pairs.reserve(kept.size());
    for (const std::uint32_t k : kept) kept_pairs.push_back(res.pairs[k]);
    const BitPair bp = encode_bits(kept_pairs);

    const double qber_est = std::clamp(res.qber_kept, 1e-4, 0.2499);
    const CascadeResult cas =
        cascade_reconcile(bp.alice, bp.bob, qber_est, cfg.cascade_passes,
                          derive_seed(cfg.seed, kCascadeSeedTag));
    res.leakage_bits = cas.leakage_bits;
    res.corrections = cas.corrections;
    if (!cas.success) {
        res.status = PipelineStatus::Aborted;
        res.note = "reconciliation left residual errors; key discarded";
        res.table = stage_accounting(in);
        return res;
    }

    const double eve_bps = cfg.eve_bound == EveBound::Max ? eve_max : res.ps_eve;
    res.final_key = privacy_amplify(bp.alice, eve_bps, cas.leakage_bits, cfg.epsilon_pa,
                                    derive_seed(cfg.seed, kPaSeedTag));
    res.key_bits = static_cast<long>(res.final_key.size());

    in.leakage_bits = res.leakage_bits;
    in.final_len = res.final_key.size();
    in.reconciled = true;
    res.table = stage_accounting(in);
    return res;
}

std::string pipeline_summary_json(const RunConfig& cfg, const PipelineResult& res) {
    nlohmann::ordered_json j;
    j["status"] = status_name(res.status);
    if (!res.note.empty()) j["note"] = res.note;
    j["config"] = {{"seed", cfg.seed},
                   {"n_symbols", cfg.n_symbols},
                   {"V", cfg.V},
                   {"eta", cfg.eta},
                   {"delta", cfg.delta},
                   {"attack", cfg.attack == Attack::Collective ? "collective" : "individual"},
                   {"post_selection", cfg.post_selection},
                   {"symbol_rate_hz", cfg.symbol_rate_hz}};
    j["raw_ensemble"] = {{"i_ab", res.raw.i_ab}, {"eve", res.raw.eve}, {"net", res.raw.net}};
    j["counts"] = {{"n_symbols", cfg.n_symbols},
                   {"n_sifted", res.n_sifted},
                   {"n_kept", res.n_kept},
                   {"kept_over_sifted",
                    res.n_sifted ? static_cast<double>(res.n_kept) /
                                       static_cast<double>(res.n_sifted)
                                 : 0.0}};
    j["post_selected"] = {{"i_ab", res.ps_i_ab},
                          {"eve", res.ps_eve},
                          {"net", res.ps_net},
                          {"qber", res.qber_kept}};
    j["reconciliation"] = {{"leakage_bits", res.leakage_bits},
                           {"corrections", res.corrections}};
    j["key"] = {{"bits", res.key_bits}, {"hex", bits_to_hex(res.final_key)}};
    j["stages"] = table_json(res.table);
    return j.dump(2) + "\n";
}

std::string session_summary_json(const RunConfig& cfg, const SessionResult& res) {
    nlohmann::ordered_json j;
    j["status"] = res.aborted ? "aborted" : "ok";
    if (!res.abort_reason.empty()) j["abort_reason"] = res.abort_reason;
    j["config"] = {{"seed", cfg.seed},
                   {"n_symbols", cfg.n_symbols},
                   {"V", cfg.V},
                   {"eta", cfg.eta},
                   {"delta", cfg.delta},
                   {"attack", cfg.attack == Attack::Collective ? "collective" : "individual"},
                   {"post_selection", cfg.post_selection},
                   {"transport", cfg.transport == TransportKind::Queue ? "queue" : "socket"}};
    j["alice"] = stats_json(res.alice_stats);
    j["bob"] = stats_json(res.bob_stats);
    j["transcript"] = {{"bytes", res.transcript_stats.bytes},
                       {"frames", res.transcript_stats.frames},
                       {"parity_bits", res.transcript_stats.parity_bits},
                       {"magnitudes_announced", res.transcript_stats.magnitudes_announced}};
    j["key"] = {{"bits", res.alice_key.size()},
                {"hex", bits_to_hex(res.alice_key)},
                {"match", !res.aborted && res.alice_key == res.bob_key}};
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    write_file(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace qkd
