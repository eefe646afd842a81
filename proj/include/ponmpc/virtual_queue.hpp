#ifndef PONMPC_VIRTUAL_QUEUE_HPP
#define PONMPC_VIRTUAL_QUEUE_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace ponmpc {

// Global slot/link parameters. `lambda_packets` is the per-slot packet budget
// actually handed to the optimizer; the simulator substitutes the
// overhead-adjusted value (see effective_lambda in simulation.hpp).
struct SlotConfig {
    double slot_s = 0.0;
    double link_bps = 0.0;
    std::int64_t packet_bits = 0;
    std::int64_t lambda_packets = 0;
    int horizon = 0;
};

// One class of service: deadline and bandwidth contract plus the derived
// virtual-queue count and per-horizon packet budget.
struct TrafficClassSpec {
    int id = 0;
    double deadline_s = 0.0;
    double bandwidth_bps = 0.0;
    int k_slots = 0;
    std::int64_t lambda_c_packets = 0;
};

// Per-class bank of virtual queues. q[0] holds the packets that must clear in
// the immediate slot, q[k-1] the freshest arrivals.
struct VirtualQueueBank {
    std::vector<std::int64_t> q;

    static VirtualQueueBank zeros(int k) { return {std::vector<std::int64_t>(static_cast<std::size_t>(k), 0)}; }
    int k() const { return static_cast<int>(q.size()); }
    std::int64_t total() const;
};

struct AdvanceResult {
    VirtualQueueBank bank;
    std::int64_t violated = 0;
};

// Number of virtual queues for a (deadline, slot) pair: floor((d - Ts)/Ts).
// Throws InfeasibleDeadlineError when deadline < 2*slot.
int compute_k(double deadline_s, double slot_s);

// Per-slot packet budget: floor(link_bps * slot_s / packet_bits).
std::int64_t compute_lambda(double link_bps, double slot_s, std::int64_t packet_bits);

// Forced allocation for the most critical queue: min(q1, lambda).
std::int64_t mandatory_first_allocation(std::int64_t q1, std::int64_t lambda);

// One slot of state evolution. alloc[i] is taken from q[i]; the unserved
// remainder of q[0] is dropped and returned as `violated`; `arrivals` enters
// the freshest queue.
AdvanceResult advance_slot(const VirtualQueueBank& bank,
                           std::span<const std::int64_t> alloc,
                           std::int64_t arrivals);

SlotConfig make_slot_config(double slot_s, double link_bps,
                            std::int64_t packet_bits, int horizon);

TrafficClassSpec make_traffic_class_spec(int id, double deadline_s, double bandwidth_bps,
                                         const SlotConfig& cfg);

} // namespace ponmpc

#endif
