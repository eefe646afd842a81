#include "ponmpc/virtual_queue.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ponmpc/errors.hpp"

namespace ponmpc {

namespace {

// floor() with slack against representation error in quotients that are
// mathematically integral (e.g. 0.0035/0.0005).
std::int64_t floor_slack(double x) {
    return static_cast<std::int64_t>(std::floor(x + 1e-9 + std::fabs(x) * 1e-12));
}

} // namespace

std::int64_t VirtualQueueBank::total() const {
    return std::accumulate(q.begin(), q.end(), static_cast<std::int64_t>(0));
}

int compute_k(double deadline_s, double slot_s) {
    if (slot_s <= 0.0)
        throw InfeasibleDeadlineError("slot duration must be positive");
    if (deadline_s < 2.0 * slot_s - 1e-12 * slot_s)
        throw InfeasibleDeadlineError("deadline " + std::to_string(deadline_s) +
                                      "s shorter than two slots of " + std::to_string(slot_s) + "s");
    return static_cast<int>(floor_slack((deadline_s - slot_s) / slot_s));
}

std::int64_t compute_lambda(double link_bps, double slot_s, std::int64_t packet_bits) {
    if (link_bps <= 0.0 || slot_s <= 0.0 || packet_bits <= 0)
        throw Error("compute_lambda: arguments must be positive");
    return floor_slack(link_bps * slot_s / static_cast<double>(packet_bits));
}

std::int64_t mandatory_first_allocation(std::int64_t q1, std::int64_t lambda) {
    return q1 < lambda ? q1 : lambda;
}

AdvanceResult advance_slot(const VirtualQueueBank& bank,
                           std::span<const std::int64_t> alloc,
                           std::int64_t arrivals) {
    const int k = bank.k();
    if (static_cast<int>(alloc.size()) != k)
        throw DimensionMismatchError("advance_slot: alloc size " + std::to_string(alloc.size()) +
                                     " != bank size " + std::to_string(k));
    if (arrivals < 0)
        throw NegativeArrivalError("advance_slot: negative arrivals");
    for (int i = 0; i < k; ++i) {
        if (alloc[static_cast<std::size_t>(i)] < 0 || alloc[static_cast<std::size_t>(i)] > bank.q[static_cast<std::size_t>(i)])
            throw AllocationExceedsQueueError("advance_slot: allocation " +
                                              std::to_string(alloc[static_cast<std::size_t>(i)]) +
                                              " exceeds queue " + std::to_string(i + 1));
    }

    AdvanceResult out;
    out.bank.q.resize(static_cast<std::size_t>(k), 0);
    out.violated = bank.q[0] - alloc[0];
    for (int i = 1; i < k; ++i)
        out.bank.q[static_cast<std::size_t>(i - 1)] = bank.q[static_cast<std::size_t>(i)] - alloc[static_cast<std::size_t>(i)];
    out.bank.q[static_cast<std::size_t>(k - 1)] = arrivals;
    return out;
}

SlotConfig make_slot_config(double slot_s, double link_bps,
                            std::int64_t packet_bits, int horizon) {
    if (horizon < 0)
        throw Error("make_slot_config: horizon must be >= 0");
    SlotConfig cfg;
    cfg.slot_s = slot_s;
    cfg.link_bps = link_bps;
    cfg.packet_bits = packet_bits;
    cfg.lambda_packets = compute_lambda(link_bps, slot_s, packet_bits);
    cfg.horizon = horizon;
    return cfg;
}

TrafficClassSpec make_traffic_class_spec(int id, double deadline_s, double bandwidth_bps,
                                         const SlotConfig& cfg) {
    TrafficClassSpec spec;
    spec.id = id;
    spec.deadline_s = deadline_s;
    spec.bandwidth_bps = bandwidth_bps;
    spec.k_slots = compute_k(deadline_s, cfg.slot_s);
    spec.lambda_c_packets = floor_slack(bandwidth_bps * (cfg.horizon + 1) * cfg.slot_s /
                                        static_cast<double>(cfg.packet_bits));
    return spec;
}

} // namespace ponmpc
