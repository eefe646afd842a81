#ifndef PONMPC_SIMULATION_HPP
#define PONMPC_SIMULATION_HPP

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "ponmpc/allocators.hpp"
#include "ponmpc/metrics.hpp"
#include "ponmpc/traffic.hpp"
#include "ponmpc/virtual_queue.hpp"

namespace ponmpc {

constexpr double kFiberDelayPerKm = 5e-6;  // seconds

struct ClassConfig {
    double deadline_s = 0.0;
    double bandwidth_bps = 0.0;
};

struct Scenario {
    int n_onus = 4;
    std::vector<double> distance_km;  // one entry per ONU
    double link_bps = 1e9;
    double slot_s = 5e-4;
    double guard_s = 5e-6;
    std::int64_t control_overhead_bits = 1024;
    std::int64_t packet_bits = 10000;
    std::int64_t onu_buffer_bits = 10000000;
    std::vector<ClassConfig> classes;
    // class_sources[cls][onu] lists that ONU's sources for the class;
    // per-source seeds are derived from the scenario seed
    std::vector<std::vector<std::vector<SourceConfig>>> class_sources;
    std::vector<std::vector<SourceConfig>> best_effort_sources;  // [onu]
    std::string allocator = "mpc";
    AllocatorParams allocator_params;
    int horizon = 10;
    double prediction_noise_variance = 0.0;
    std::int64_t duration_slots = 0;
    std::uint64_t seed = 1;
    std::string replay_trace_csv;  // class arrivals from file instead of sources
    std::string export_trace_csv;
};

// Per-slot packet budget net of guard and control overheads; this is the
// lambda handed to the allocators so overhead can never cause over-grant.
std::int64_t effective_lambda(const SlotConfig& slot_cfg, int n_onus, double guard_s,
                              std::int64_t control_overhead_bits);

// Throws InvalidScenarioError describing the first violated invariant.
void validate_scenario(const Scenario& s);

MetricsReport run(const Scenario& scenario);

// Exposed stepping interface for tests and the experiment driver.
class Simulation {
public:
    explicit Simulation(Scenario scenario);
    ~Simulation();
    Simulation(Simulation&&) noexcept;
    Simulation& operator=(Simulation&&) noexcept;

    void step();                   // one slot
    MetricsReport finish();        // residuals + report; call once after stepping
    MetricsReport run_to_end();

    std::int64_t current_slot() const;
    const SlotConfig& effective_slot_config() const;
    const std::vector<TrafficClassSpec>& class_specs() const;

    // test hooks
    std::int64_t bank_level(int onu, int cls, int queue) const;
    std::int64_t ledger_size(int onu, int cls) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace ponmpc

#endif
