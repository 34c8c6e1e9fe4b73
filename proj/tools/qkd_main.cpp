#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qkd/report.hpp"

namespace {

bool log_enabled() {
    const char* v = std::getenv("QKD_LOG");
    return v && *v && std::string(v) != "0";
}

std::string joined(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

int exit_code(qkd::PipelineStatus s) {
    switch (s) {
        case qkd::PipelineStatus::Ok: return 0;
        case qkd::PipelineStatus::Infeasible: return 3;
        case qkd::PipelineStatus::Aborted: return 4;
    }
    return 1;
}

int run_simulate(const qkd::RunConfig& cfg, bool with_points) {
    const qkd::PipelineResult res = qkd::run_offline_pipeline(cfg);
    if (log_enabled())
        std::cerr << "pipeline: " << res.n_sifted << " sifted, " << res.n_kept << " kept, "
                  << res.key_bits << " key bits\n";
    qkd::write_file(joined(cfg.out_dir, "summary.json"), qkd::pipeline_summary_json(cfg, res));
    qkd::write_file(joined(cfg.out_dir, "stages.csv"), qkd::stage_csv(res.table));
    qkd::write_file(joined(cfg.out_dir, "stages.txt"), qkd::stage_text(res.table));
    if (with_points)
        qkd::write_file(joined(cfg.out_dir, "points.csv"),
                        qkd::points_csv(res.pairs, res.selection, cfg.attack));
    if (!res.final_key.empty())
        qkd::write_file(joined(cfg.out_dir, "key.hex"),
                        qkd::bits_to_hex(res.final_key) + "\n");

    std::cout << qkd::stage_text(res.table);
    if (res.status == qkd::PipelineStatus::Ok)
        std::cout << "ok: " << res.key_bits << " secret key bits ("
                  << qkd::fmt_double(res.n_kept
                                         ? static_cast<double>(res.key_bits) /
                                               static_cast<double>(res.n_kept)
                                         : 0.0)
                  << " per kept symbol)\n";
    else
        std::cout << (res.status == qkd::PipelineStatus::Infeasible ? "infeasible: "
                                                                    : "aborted: ")
                  << res.note << "\n";
    return exit_code(res.status);
}

int run_boundary(const qkd::RunConfig& cfg) {
    const qkd::SecurityContext ctx = cfg.context();
    const double y_min = 0.01, y_max = 5.0, step = 0.01;
    qkd::write_file(joined(cfg.out_dir, "boundary.csv"),
                    qkd::boundary_csv(ctx, y_min, y_max, step));
    const long n_steps = std::lround((y_max - y_min) / step);
    bool any = false;
    for (long k = 0; k <= n_steps && !any; ++k) {
        const double y = y_min + static_cast<double>(k) * step;
        any = qkd::boundary(y, ctx, qkd::Attack::Collective).has_value() ||
              qkd::boundary(y, ctx, qkd::Attack::Individual).has_value();
    }
    if (!any) {
        std::cout << "infeasible: no post-selection threshold exists for this channel\n";
        return 3;
    }
    std::cout << "wrote " << joined(cfg.out_dir, "boundary.csv") << "\n";
    return 0;
}

int run_distill(const qkd::RunConfig& cfg) {
    const qkd::SessionResult res = qkd::run_session(cfg, cfg.transport);
    qkd::write_file(joined(cfg.out_dir, "session.json"), qkd::session_summary_json(cfg, res));
    if (!res.alice_key.empty())
        qkd::write_file(joined(cfg.out_dir, "key.hex"),
                        qkd::bits_to_hex(res.alice_key) + "\n");
    if (log_enabled())
        std::cerr << "session: " << res.transcript_stats.frames << " frames, "
                  << res.transcript_stats.bytes << " bytes, "
                  << res.transcript_stats.parity_bits << " parity bits\n";
    if (res.aborted) {
        std::cout << "aborted: " << res.abort_reason << "\n";
        return 4;
    }
    std::cout << "kept " << res.bob_stats.n_kept << " of " << res.bob_stats.n_sifted
              << " sifted symbols; key " << res.alice_key.size() << " bits\n";
    if (res.alice_key.empty()) {
        std::cout << "infeasible: privacy amplification left no key\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale simulator for entanglement-based CV-QKD with post-selection"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file")->required();
        cmd->add_option("--seed", seed, "override the configured seed");
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* sim = app.add_subcommand(
        "simulate", "full pipeline with per-point output (points.csv, stages, key)");
    CLI::App* bnd = app.add_subcommand(
        "boundary", "post-selection threshold curves y_B*(y_A) for both attacks");
    CLI::App* dis = app.add_subcommand(
        "distill", "run the two-party session over a transport and distill a key");
    CLI::App* rep = app.add_subcommand(
        "report", "stage-by-stage rate table for the configured channel");
    for (CLI::App* cmd : {sim, bnd, dis, rep}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        qkd::RunConfig cfg = qkd::load_config(config_path);
        CLI::App* active = app.get_subcommands().front();
        if (active->count("--seed") > 0) cfg.seed = seed;
        if (active->count("--out") > 0) cfg.out_dir = out_dir;
        if (sim->parsed()) return run_simulate(cfg, true);
        if (bnd->parsed()) return run_boundary(cfg);
        if (dis->parsed()) return run_distill(cfg);
        if (rep->parsed()) return run_simulate(cfg, false);
        return 2;
    } catch (const qkd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
