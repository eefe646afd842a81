#ifndef PONMPC_METRICS_HPP
#define PONMPC_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ponmpc {

// Streaming per-packet delay accumulator (Welford); population variance.
struct DelayStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double max_s = 0.0;

    void add(double delay_s) {
        ++count;
        const double d = delay_s - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (delay_s - mean);
        if (delay_s > max_s) max_s = delay_s;
    }
    double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
};

struct ClassCounters {
    std::int64_t offered = 0;
    std::int64_t buffer_drops = 0;
    std::int64_t deadline_drops = 0;
    std::int64_t served = 0;
    std::int64_t residual = 0;
    DelayStats delay;
};

struct RunCounters {
    std::vector<ClassCounters> classes;
    ClassCounters best_effort;
    double payload_bits = 0.0;          // fog-link payload only
    std::vector<float> utilization;     // per-slot payload fraction
    double max_poll_gap_s = 0.0;
    std::int64_t slots = 0;
};

struct ClassMetrics {
    std::string label;
    std::int64_t offered = 0;
    std::int64_t served = 0;
    std::int64_t deadline_drops = 0;
    std::int64_t buffer_drops = 0;
    std::int64_t residual = 0;
    double violation_pct = 0.0;
    double buffer_drop_pct = 0.0;
    double mean_delay_s = 0.0;
    double delay_variance_s2 = 0.0;  // jitter
    double max_delay_s = 0.0;
};

struct MetricsReport {
    std::vector<ClassMetrics> classes;
    ClassMetrics best_effort;
    double throughput_pct = 0.0;        // payload-busy time over total time
    double mean_utilization_pct = 0.0;
    double max_poll_gap_s = 0.0;
    std::vector<float> utilization_trace;
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    std::string notes;

    bool conservation_holds() const;
};

// Scenario is only needed for normalization constants.
struct MetricsContext {
    double link_bps = 0.0;
    double slot_s = 0.0;
    std::int64_t duration_slots = 0;
    std::uint64_t seed = 0;
};

MetricsReport finalize(const RunCounters& counters, const MetricsContext& ctx);

} // namespace ponmpc

#endif
