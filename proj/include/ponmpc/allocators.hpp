#ifndef PONMPC_ALLOCATORS_HPP
#define PONMPC_ALLOCATORS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ponmpc/virtual_queue.hpp"

namespace ponmpc {

// Queue status reported by one ONU at a slot boundary.
struct OnuReport {
    int onu_id = 0;
    std::vector<VirtualQueueBank> banks;  // one per class
    std::int64_t best_effort_backlog = 0;
};

// Per-slot grants. The fog link carries class_queue and best_effort grants;
// olt_* is used only by the out-of-band baseline, whose non-fog traffic rides
// the parallel OLT wavelength.
struct OnuGrant {
    std::vector<std::vector<std::int64_t>> class_queue;  // [cls][queue-1]
    std::int64_t best_effort = 0;
    std::vector<std::vector<std::int64_t>> olt_class_queue;
    std::int64_t olt_best_effort = 0;
};

struct GrantSchedule {
    std::vector<OnuGrant> onus;
    std::vector<int> transmission_order;  // ascending ONU ids

    std::int64_t fog_total() const;
    std::int64_t olt_total() const;
    bool has_olt_overlay() const;
};

struct AllocatorParams {
    double slice_fraction = 0.5;
    double olt_window_fraction = 0.5;
};

// Water-filling split of `total` packets over per-ONU requests; integer
// remainders go one packet each to the lowest ONU ids.
std::vector<std::int64_t> max_min_fair_distribute(std::int64_t total,
                                                  const std::vector<std::int64_t>& requests);

// Far-sighted allocator: aggregates queues across ONUs, solves the horizon
// program, applies the first-slot column, splits per (class, queue) by
// max-min fairness, and hands leftover capacity to best effort.
GrantSchedule mpc_allocate(const std::vector<OnuReport>& reports,
                           const std::vector<TrafficClassSpec>& specs,
                           const SlotConfig& slot_cfg,
                           const std::vector<std::vector<std::int64_t>>& predictions);

// Same pipeline with the single-slot max-flow solution.
GrantSchedule myopic_allocate(const std::vector<OnuReport>& reports,
                              const std::vector<TrafficClassSpec>& specs,
                              const SlotConfig& slot_cfg);

// Rigid per-ONU TDM shares, earliest-deadline-first within each ONU; unused
// share is wasted.
GrantSchedule fixed_tdm_allocate(const std::vector<OnuReport>& reports,
                                 const SlotConfig& slot_cfg, int n_onus);

// Per-class assured packet budgets distributed by backlog, then leftover
// capacity serves remaining backlog in class-priority order.
GrantSchedule assured_allocate(const std::vector<OnuReport>& reports,
                               const std::vector<TrafficClassSpec>& specs,
                               const SlotConfig& slot_cfg);

// A reserved slice serves delay classes in strict priority; the rest (plus
// any unused slice) serves best effort.
GrantSchedule priority_allocate(const std::vector<OnuReport>& reports,
                                const std::vector<TrafficClassSpec>& specs,
                                const SlotConfig& slot_cfg, double slice_fraction);

// Out-of-band coupling baseline: class 1 is fog traffic whose grant is capped
// by a fraction of the ONU's actual OLT-upstream transmission; all other
// classes and best effort ride the OLT wavelength in fixed windows.
GrantSchedule oob_allocate(const std::vector<OnuReport>& reports,
                           const SlotConfig& slot_cfg, double olt_window_fraction);

// Dispatch by scenario allocator name: mpc | myopic | fixed | assured |
// priority | oob.
GrantSchedule allocate_by_name(const std::string& name,
                               const std::vector<OnuReport>& reports,
                               const std::vector<TrafficClassSpec>& specs,
                               const SlotConfig& slot_cfg,
                               const std::vector<std::vector<std::int64_t>>& predictions,
                               const AllocatorParams& params);

bool is_known_allocator(const std::string& name);

} // namespace ponmpc

#endif
