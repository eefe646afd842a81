#ifndef PONMPC_EXPERIMENT_HPP
#define PONMPC_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ponmpc/metrics.hpp"
#include "ponmpc/simulation.hpp"

namespace ponmpc {

inline constexpr int kCsvSchemaVersion = 1;

struct ExperimentSpec {
    Scenario base;
    std::vector<double> load_multipliers{1.0};
    std::vector<double> be_load_multipliers{1.0};
    std::vector<std::string> allocators;  // empty = {base.allocator}
    std::vector<int> horizons;            // empty = {base.horizon}
    std::vector<double> noise_variances;  // empty = {base.prediction_noise_variance}
    std::vector<std::uint64_t> seeds;     // empty = base.seed + 0..repetitions-1
    int repetitions = 1;
    int max_points = 4096;
    std::string output_dir = "out";
};

struct SweepCoords {
    std::string allocator;
    double load_multiplier = 1.0;
    double be_load_multiplier = 1.0;
    int horizon = 0;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
};

// Built-in parameter sets. "desk" is the 4-ONU scaled configuration used by
// default; "full" is the full 16-ONU arrangement.
Scenario desk_scenario();
Scenario full_scale_scenario();

// Parses a JSON experiment file; unknown keys are rejected. The optional
// "preset" key selects the base parameter set, explicit keys override it.
ExperimentSpec parse_experiment_file(const std::string& path);
ExperimentSpec parse_experiment_json(const std::string& text);

// Applies sweep coordinates to the base scenario (load multipliers scale
// source duty cycles, clamped to 1.0).
Scenario materialize(const Scenario& base, const SweepCoords& coords);

std::vector<SweepCoords> expand_sweep(const ExperimentSpec& spec);

std::uint64_t hash_scenario(const Scenario& s);

struct ExperimentResult {
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    int points = 0;
    std::vector<std::string> failures;
};

// Executes every sweep point (parallel across points, output order fixed),
// writing results.csv and summary.json under the output directory. The
// PONMPC_OUTPUT_DIR environment variable overrides spec.output_dir and
// PONMPC_JOBS bounds worker threads.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// One whitespace-delimited "x y" file per distinct value of `group_by`
// (x = load_multiplier, y = mean of `metric` over matching rows). Returns the
// paths written.
std::vector<std::filesystem::path> emit_plot_data(const std::string& csv_path,
                                                  const std::string& metric,
                                                  const std::string& group_by,
                                                  const std::string& out_dir);

// CSV helpers shared with the tests.
std::string csv_header();
void append_csv_rows(std::ostream& os, const SweepCoords& coords,
                     std::uint64_t scenario_hash, const MetricsReport& report);

} // namespace ponmpc

#endif
