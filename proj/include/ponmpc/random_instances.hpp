#ifndef PONMPC_RANDOM_INSTANCES_HPP
#define PONMPC_RANDOM_INSTANCES_HPP

#include <cstdint>

#include "ponmpc/mpc_program.hpp"
#include "ponmpc/rng.hpp"

namespace ponmpc {

// Bounds for randomized allocation programs used by the cross-solver checks.
struct InstanceBounds {
    int max_classes = 3;
    int max_k = 5;
    int max_horizon = 4;
    std::int64_t max_value = 20;      // queue states, arrivals, budgets
    double max_search_space = 500000; // keeps the exhaustive oracle tractable
};

struct GeneratedInstance {
    std::vector<VirtualQueueBank> banks;
    std::vector<TrafficClassSpec> specs;
    SlotConfig slot_cfg;
    std::vector<std::vector<std::int64_t>> predicted;
    LpInstance lp;
};

// Draws dimensions and integer data uniformly within the bounds, then thins
// queue states until the brute-force box fits the search-space cap.
GeneratedInstance random_mpc_instance(Rng& rng, const InstanceBounds& bounds,
                                      bool myopic_only = false);

} // namespace ponmpc

#endif
