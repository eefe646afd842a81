#include "ponmpc/metrics.hpp"

namespace ponmpc {

namespace {

ClassMetrics summarize(const ClassCounters& c, const std::string& label) {
    ClassMetrics m;
    m.label = label;
    m.offered = c.offered;
    m.served = c.served;
    m.deadline_drops = c.deadline_drops;
    m.buffer_drops = c.buffer_drops;
    m.residual = c.residual;
    if (c.offered > 0) {
        m.violation_pct = 100.0 * static_cast<double>(c.deadline_drops) / static_cast<double>(c.offered);
        m.buffer_drop_pct = 100.0 * static_cast<double>(c.buffer_drops) / static_cast<double>(c.offered);
    }
    m.mean_delay_s = c.delay.count > 0 ? c.delay.mean : 0.0;
    m.delay_variance_s2 = c.delay.variance();
    m.max_delay_s = c.delay.max_s;
    return m;
}

} // namespace

bool MetricsReport::conservation_holds() const {
    auto check = [](const ClassMetrics& m) {
        return m.offered == m.served + m.deadline_drops + m.buffer_drops + m.residual;
    };
    for (const ClassMetrics& m : classes)
        if (!check(m)) return false;
    return check(best_effort);
}

MetricsReport finalize(const RunCounters& counters, const MetricsContext& ctx) {
    MetricsReport report;
    report.classes.reserve(counters.classes.size());
    for (std::size_t c = 0; c < counters.classes.size(); ++c)
        report.classes.push_back(summarize(counters.classes[c], "class" + std::to_string(c + 1)));
    report.best_effort = summarize(counters.best_effort, "best_effort");

    const double total_s = ctx.slot_s * static_cast<double>(ctx.duration_slots);
    if (total_s > 0.0 && ctx.link_bps > 0.0)
        report.throughput_pct = 100.0 * counters.payload_bits / (ctx.link_bps * total_s);
    double util_sum = 0.0;
    for (float u : counters.utilization) util_sum += static_cast<double>(u);
    if (!counters.utilization.empty())
        report.mean_utilization_pct = 100.0 * util_sum / static_cast<double>(counters.utilization.size());
    report.max_poll_gap_s = counters.max_poll_gap_s;
    report.utilization_trace = counters.utilization;
    report.seed = ctx.seed;
    report.notes = "busy=payload-only;jitter=population-variance";
    return report;
}

} // namespace ponmpc
