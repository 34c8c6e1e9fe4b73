#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkd/config.hpp"
#include "qkd/distill.hpp"
#include "qkd/session.hpp"

namespace qkd {

// Stable numeric formatting shared by every emitter (shortest round-trip).
std::string fmt_double(double v);

std::string bits_to_hex(const std::vector<std::uint8_t>& bits);

// index,basis,Y_A,Y_B,kept,class,p,f,net_rate
std::string points_csv(const std::vector<SiftedPair>& pairs, const SelectionResult& sel,
                       Attack attack);

// y_A,y_B_threshold_collective,y_B_threshold_individual (empty when none)
std::string boundary_csv(const SecurityContext& ctx, double y_a_min, double y_a_max,
                         double step);

std::string stage_csv(const std::vector<StageRow>& rows);
std::string stage_text(const std::vector<StageRow>& rows);

enum class PipelineStatus { Ok, Infeasible, Aborted };

struct PipelineResult {
    PipelineStatus status = PipelineStatus::Ok;
    std::string note;
    EnsembleRates raw;
    std::size_t n_sifted = 0;
    std::size_t n_kept = 0;
    double ps_i_ab = 0.0;
    double ps_eve = 0.0;
    double ps_net = 0.0;
    double qber_kept = 0.0;  // mean error probability over kept pairs
    std::size_t leakage_bits = 0;
    std::size_t corrections = 0;
    long key_bits = 0;
    std::vector<StageRow> table;
    std::vector<SiftedPair> pairs;
    SelectionResult selection;
    std::vector<std::uint8_t> final_key;
};

// Single-process pipeline with the joint decision rule: sample, sift,
// post-select, reconcile, amplify, account. Skips reconciliation when the
// raw ensemble is infeasible with post-selection disabled.
PipelineResult run_offline_pipeline(const RunConfig& cfg);

std::string pipeline_summary_json(const RunConfig& cfg, const PipelineResult& res);
std::string session_summary_json(const RunConfig& cfg, const SessionResult& res);

void write_file(const std::string& path, const std::string& content);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace qkd
