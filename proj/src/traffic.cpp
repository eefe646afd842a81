#include "ponmpc/traffic.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ponmpc/errors.hpp"

namespace ponmpc {

double pareto_shape_for_hurst(double hurst) {
    if (hurst <= 0.0 || hurst >= 1.0)
        throw InvalidHurstError("hurst parameter " + std::to_string(hurst) + " outside (0,1)");
    return 3.0 - 2.0 * hurst;
}

OnOffSource::OnOffSource(const SourceConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed), shape_(pareto_shape_for_hurst(cfg.hurst)) {
    if (cfg.peak_bps <= 0.0)
        throw Error("OnOffSource: peak_bps must be positive");
    if (cfg.packet_bits <= 0)
        throw Error("OnOffSource: packet_bits must be positive");
    if (cfg.mean_load <= 0.0 || cfg.mean_load > 1.0)
        throw Error("OnOffSource: mean_load must be in (0,1]");
    interval_ = static_cast<double>(cfg.packet_bits) / cfg.peak_bps;
    always_on_ = cfg.mean_load >= 1.0;
    off_scale_ = always_on_ ? 0.0 : interval_ * (1.0 - cfg.mean_load) / cfg.mean_load;
}

std::int64_t OnOffSource::generate(double t0, double dt, std::vector<double>* times) {
    const double target = t0 + dt;
    double cursor = t0;
    std::int64_t count = 0;

    if (!started_) {
        started_ = true;
        if (always_on_ || rng_.uniform01() <= cfg_.mean_load) {
            in_on_ = true;
            phase_end_ = t0 + rng_.pareto(interval_, shape_);
        } else {
            in_on_ = false;
            phase_end_ = t0 + rng_.pareto(off_scale_, shape_);
        }
    }

    // consume one ON segment [cursor, seg_end): bits accrue at peak rate, a
    // packet leaves whenever a full packet has accumulated
    auto drain_on_segment = [&](double seg_end) {
        const double gained = (seg_end - cursor) / interval_;
        const double total = credit_ + gained;
        const std::int64_t n = static_cast<std::int64_t>(std::floor(total + 1e-9));
        if (times) {
            for (std::int64_t k = 1; k <= n; ++k)
                times->push_back(cursor + (static_cast<double>(k) - credit_) * interval_);
        }
        count += n;
        credit_ = total - static_cast<double>(n);
        if (credit_ < 0.0) credit_ = 0.0;
        cursor = seg_end;
    };

    if (always_on_) {
        drain_on_segment(target);
        clock_ = target;
        return count;
    }

    while (cursor < target) {
        if (in_on_) {
            if (phase_end_ > target) {
                drain_on_segment(target);
                break;
            }
            drain_on_segment(phase_end_);
            in_on_ = false;
            phase_end_ = cursor + rng_.pareto(off_scale_, shape_);
        } else {
            if (phase_end_ >= target) break;
            cursor = phase_end_;
            in_on_ = true;
            phase_end_ = cursor + rng_.pareto(interval_, shape_);
        }
    }
    clock_ = target;
    return count;
}

std::int64_t arrivals_for_slot(std::vector<OnOffSource>& sources, double slot_s,
                               std::vector<double>* times) {
    if (slot_s <= 0.0)
        throw Error("arrivals_for_slot: slot_s must be positive");
    std::int64_t total = 0;
    for (OnOffSource& src : sources)
        total += src.generate(src.clock(), slot_s, times);
    return total;
}

void write_trace_csv(std::ostream& os, const ArrivalTrace& trace) {
    os << "slot,onu,class,packets\n";
    for (std::size_t t = 0; t < trace.counts.size(); ++t)
        for (std::size_t o = 0; o < trace.counts[t].size(); ++o)
            for (std::size_t c = 0; c < trace.counts[t][o].size(); ++c)
                if (trace.counts[t][o][c] != 0)
                    os << t << ',' << o << ',' << c << ',' << trace.counts[t][o][c] << '\n';
}

ArrivalTrace read_trace_csv(std::istream& is, int n_onus, int n_classes) {
    ArrivalTrace trace;
    std::string line;
    if (!std::getline(is, line))
        throw Error("trace csv: empty file");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::int64_t vals[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ls, field, ','))
                throw Error("trace csv: malformed line: " + line);
            vals[i] = std::stoll(field);
        }
        const std::int64_t slot = vals[0], onu = vals[1], cls = vals[2], packets = vals[3];
        if (onu < 0 || onu >= n_onus || cls < 0 || cls >= n_classes || packets < 0 || slot < 0)
            throw Error("trace csv: field out of range: " + line);
        if (slot >= trace.slots())
            trace.counts.resize(static_cast<std::size_t>(slot + 1),
                                std::vector<std::vector<std::int64_t>>(
                                    static_cast<std::size_t>(n_onus),
                                    std::vector<std::int64_t>(static_cast<std::size_t>(n_classes), 0)));
        trace.counts[static_cast<std::size_t>(slot)][static_cast<std::size_t>(onu)]
                    [static_cast<std::size_t>(cls)] += packets;
    }
    return trace;
}

} // namespace ponmpc
