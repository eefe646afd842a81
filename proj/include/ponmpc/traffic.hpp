#ifndef PONMPC_TRAFFIC_HPP
#define PONMPC_TRAFFIC_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ponmpc/rng.hpp"

namespace ponmpc {

struct SourceConfig {
    double hurst = 0.8;
    double peak_bps = 0.0;
    double mean_load = 0.0;   // long-run rate as a fraction of peak, (0, 1]
    std::int64_t packet_bits = 10000;
    std::uint64_t seed = 0;
};

// Pareto shape used for both ON and OFF period lengths.
double pareto_shape_for_hurst(double hurst);

// ON/OFF source. During ON periods bits accrue at the peak rate and a packet
// is emitted whenever a full packet's worth has accumulated, so the long-run
// rate converges to mean_load * peak_bps without per-burst rounding loss.
// Period lengths are Pareto; the ON scale is one packet transmission time and
// the OFF scale is solved from the load equation.
class OnOffSource {
public:
    explicit OnOffSource(const SourceConfig& cfg);

    // appends the arrival times falling in [t0, t0 + dt) and returns the count
    std::int64_t generate(double t0, double dt, std::vector<double>* times = nullptr);

    double clock() const { return clock_; }
    const SourceConfig& config() const { return cfg_; }

private:
    SourceConfig cfg_;
    Rng rng_;
    double interval_;     // packet transmission time at peak rate
    double shape_;
    double off_scale_;
    bool always_on_;
    bool in_on_ = false;
    bool started_ = false;
    double clock_ = 0.0;
    double phase_end_ = 0.0;
    double credit_ = 0.0;  // fraction of a packet accumulated so far
};

// Aggregate arrivals over one slot for a bank of sources; advances each
// source's clock by slot_s.
std::int64_t arrivals_for_slot(std::vector<OnOffSource>& sources, double slot_s,
                               std::vector<double>* times = nullptr);

// Per-slot packet counts indexed [slot][onu][cls]; reproducible from config.
struct ArrivalTrace {
    std::vector<std::vector<std::vector<std::int64_t>>> counts;

    std::int64_t slots() const { return static_cast<std::int64_t>(counts.size()); }
};

// CSV replay format: header, then one line "slot,onu,class,packets" per
// nonzero cell. `cls` is 1-based in the file; best-effort rows use class 0.
void write_trace_csv(std::ostream& os, const ArrivalTrace& trace);
ArrivalTrace read_trace_csv(std::istream& is, int n_onus, int n_classes);

} // namespace ponmpc

#endif
