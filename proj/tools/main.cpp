#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ponmpc/errors.hpp"
#include "ponmpc/experiment.hpp"
#include "ponmpc/random_instances.hpp"
#include "ponmpc/unimodular.hpp"

namespace {

int cmd_run(const std::string& config, const std::string& output_dir) {
    ponmpc::ExperimentSpec spec = ponmpc::parse_experiment_file(config);
    if (!output_dir.empty()) spec.output_dir = output_dir;
    const ponmpc::ExperimentResult result = ponmpc::run_experiment(spec);
    std::printf("wrote %s (%d points)\n", result.csv_path.string().c_str(), result.points);
    std::printf("wrote %s\n", result.summary_path.string().c_str());
    if (!result.failures.empty()) {
        std::fprintf(stderr, "%zu sweep points failed:\n", result.failures.size());
        for (const std::string& f : result.failures) std::fprintf(stderr, "  %s\n", f.c_str());
        return 1;
    }
    return 0;
}

int cmd_plot(const std::string& csv, const std::string& metric, const std::string& group_by,
             const std::string& out_dir) {
    const auto paths = ponmpc::emit_plot_data(csv, metric, group_by, out_dir);
    for (const auto& p : paths) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

int cmd_validate(const std::string& config) {
    const ponmpc::ExperimentSpec spec = ponmpc::parse_experiment_file(config);
    ponmpc::validate_scenario(spec.base);
    const auto points = ponmpc::expand_sweep(spec);
    for (const auto& coords : points)
        ponmpc::validate_scenario(ponmpc::materialize(spec.base, coords));
    std::printf("config ok: %zu sweep points\n", points.size());
    return 0;
}

int cmd_oracle(int instances, std::uint64_t seed) {
    ponmpc::Rng rng(seed);
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name,
                    detail.empty() ? "" : ": ", detail.c_str());
        if (!ok) ++failures;
    };

    // LP optimum vs exhaustive integer optimum
    {
        int bad = 0;
        for (int i = 0; i < instances; ++i) {
            const auto gi = ponmpc::random_mpc_instance(rng, {});
            const auto lp = ponmpc::solve_lp(gi.lp);
            if (lp.objective != ponmpc::brute_force_ilp(gi.lp)) ++bad;
        }
        report("lp equals exhaustive integer optimum", bad == 0,
               std::to_string(instances) + " instances, " + std::to_string(bad) + " mismatches");
    }

    // max-flow route vs LP on single-slot instances
    {
        int bad = 0;
        for (int i = 0; i < instances; ++i) {
            const auto gi = ponmpc::random_mpc_instance(rng, {}, /*myopic_only=*/true);
            const auto lp = ponmpc::solve_lp(gi.lp);
            const auto flow = ponmpc::solve_myopic_maxflow(gi.banks, gi.specs, gi.slot_cfg);
            if (lp.objective != flow.objective || lp.objective != ponmpc::brute_force_ilp(gi.lp))
                ++bad;
        }
        report("max-flow equals lp on single-slot instances", bad == 0,
               std::to_string(instances) + " instances, " + std::to_string(bad) + " mismatches");
    }

    // constraint matrices pass the unimodularity check; a known counterexample fails it
    {
        bool ok = true;
        for (int k = 1; k <= 3 && ok; ++k)
            for (int h = 0; h <= 3 && ok; ++h) {
                ponmpc::SlotConfig cfg;
                cfg.slot_s = 5e-4;
                cfg.link_bps = 1e9;
                cfg.packet_bits = 10000;
                cfg.horizon = h;
                cfg.lambda_packets = 10;
                ponmpc::TrafficClassSpec spec;
                spec.id = 1;
                spec.k_slots = k;
                spec.deadline_s = (k + 1) * cfg.slot_s;
                spec.lambda_c_packets = 10;
                std::vector<ponmpc::VirtualQueueBank> banks{ponmpc::VirtualQueueBank::zeros(k)};
                for (auto& q : banks[0].q) q = 3;
                std::vector<std::vector<std::int64_t>> pred{
                    std::vector<std::int64_t>(static_cast<std::size_t>(h), 2)};
                const auto inst = ponmpc::build_mpc_program(banks, {spec}, cfg, pred);
                const auto reduced = ponmpc::reduce_by_unit_rows(ponmpc::constraint_matrix(inst));
                ok = ponmpc::check_totally_unimodular_ghouila_houri(reduced);
            }
        const bool counter = !ponmpc::check_totally_unimodular_ghouila_houri({{1, 1}, {1, -1}});
        report("program matrices are totally unimodular", ok && counter,
               counter ? "counterexample rejected" : "counterexample accepted");
    }

    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deadline-aware bandwidth allocation simulator for polling PONs"};
    app.require_subcommand(1);

    std::string config;
    std::string output_dir;
    auto* run = app.add_subcommand("run", "run an experiment sweep from a config file");
    run->add_option("config", config, "experiment config (json)")->required();
    run->add_option("--output-dir", output_dir, "override the configured output directory");

    std::string csv, metric, group_by = "allocator", plot_out = ".";
    auto* plot = app.add_subcommand("plot", "emit per-curve data files from a results csv");
    plot->add_option("csv", csv, "results.csv from a run")->required();
    plot->add_option("--metric", metric, "metric column to plot")->required();
    plot->add_option("--group-by", group_by, "column that separates curves");
    plot->add_option("--out-dir", plot_out, "directory for .dat files");

    std::string vconfig;
    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", vconfig, "experiment config (json)")->required();

    int instances = 200;
    std::uint64_t oracle_seed = 7;
    auto* oracle = app.add_subcommand("oracle", "run the optimizer cross-checks");
    oracle->add_option("--instances", instances, "randomized instances per suite");
    oracle->add_option("--seed", oracle_seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config, output_dir);
        if (plot->parsed()) return cmd_plot(csv, metric, group_by, plot_out);
        if (validate->parsed()) return cmd_validate(vconfig);
        if (oracle->parsed()) return cmd_oracle(instances, oracle_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
