#include "ponmpc/random_instances.hpp"

#include <algorithm>

#include "ponmpc/errors.hpp"

namespace ponmpc {

GeneratedInstance random_mpc_instance(Rng& rng, const InstanceBounds& bounds,
                                      bool myopic_only) {
    GeneratedInstance gi;
    const int ncls = static_cast<int>(rng.uniform_int(1, bounds.max_classes));
    const int h = myopic_only ? 0 : static_cast<int>(rng.uniform_int(0, bounds.max_horizon));

    gi.slot_cfg.slot_s = 5e-4;
    gi.slot_cfg.link_bps = 1e9;
    gi.slot_cfg.packet_bits = 10000;
    gi.slot_cfg.horizon = h;
    gi.slot_cfg.lambda_packets = rng.uniform_int(0, bounds.max_value);

    for (int c = 0; c < ncls; ++c) {
        TrafficClassSpec spec;
        spec.id = c + 1;
        spec.k_slots = static_cast<int>(rng.uniform_int(1, bounds.max_k));
        spec.deadline_s = (spec.k_slots + 1) * gi.slot_cfg.slot_s;
        spec.lambda_c_packets = rng.uniform_int(0, bounds.max_value);
        spec.bandwidth_bps = static_cast<double>(spec.lambda_c_packets) *
                             static_cast<double>(gi.slot_cfg.packet_bits) /
                             ((h + 1) * gi.slot_cfg.slot_s);
        gi.specs.push_back(spec);

        VirtualQueueBank bank = VirtualQueueBank::zeros(spec.k_slots);
        for (auto& q : bank.q)
            if (rng.uniform01() < 0.7) q = rng.uniform_int(0, bounds.max_value);
        gi.banks.push_back(std::move(bank));

        std::vector<std::int64_t> pred(static_cast<std::size_t>(h), 0);
        for (auto& a : pred)
            if (rng.uniform01() < 0.6) a = rng.uniform_int(0, bounds.max_value);
        gi.predicted.push_back(std::move(pred));
    }

    gi.lp = build_mpc_program(gi.banks, gi.specs, gi.slot_cfg, gi.predicted);

    // shrink until the exhaustive oracle can afford the box
    int guard = 0;
    while (brute_force_search_space(gi.lp) > bounds.max_search_space) {
        if (++guard > 10000)
            throw InternalError("random_mpc_instance: could not shrink the search space");
        std::vector<std::pair<int, int>> positive;  // (class, slot-index) pairs; slot<0 = bank
        for (int c = 0; c < ncls; ++c) {
            for (int i = 0; i < gi.specs[static_cast<std::size_t>(c)].k_slots; ++i)
                if (gi.banks[static_cast<std::size_t>(c)].q[static_cast<std::size_t>(i)] > 0)
                    positive.push_back({c, -(i + 1)});
            for (int s = 0; s < h; ++s)
                if (gi.predicted[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] > 0)
                    positive.push_back({c, s + 1});
        }
        if (positive.empty())
            throw InternalError("random_mpc_instance: empty box still too large");
        const auto pick = positive[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(positive.size()) - 1))];
        auto& cell = pick.second < 0
                         ? gi.banks[static_cast<std::size_t>(pick.first)].q[static_cast<std::size_t>(-pick.second - 1)]
                         : gi.predicted[static_cast<std::size_t>(pick.first)][static_cast<std::size_t>(pick.second - 1)];
        cell /= 2;
        gi.lp = build_mpc_program(gi.banks, gi.specs, gi.slot_cfg, gi.predicted);
    }
    return gi;
}

} // namespace ponmpc
