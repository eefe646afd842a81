#include "ponmpc/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ponmpc/errors.hpp"
#include "ponmpc/mpc_program.hpp"

namespace ponmpc {

namespace {

int max_queue_depth(const std::vector<OnuReport>& reports) {
    int k = 0;
    for (const OnuReport& r : reports)
        for (const VirtualQueueBank& b : r.banks) k = std::max(k, b.k());
    return k;
}

GrantSchedule empty_schedule(const std::vector<OnuReport>& reports) {
    GrantSchedule gs;
    gs.onus.resize(reports.size());
    gs.transmission_order.resize(reports.size());
    for (std::size_t o = 0; o < reports.size(); ++o) {
        gs.transmission_order[o] = reports[o].onu_id;
        gs.onus[o].class_queue.resize(reports[o].banks.size());
        for (std::size_t c = 0; c < reports[o].banks.size(); ++c)
            gs.onus[o].class_queue[c].assign(static_cast<std::size_t>(reports[o].banks[c].k()), 0);
    }
    return gs;
}

// Serve up to `budget` packets of one ONU's class backlog oldest-first,
// honoring what has already been granted per queue. Returns packets granted.
std::int64_t grant_oldest_first(const VirtualQueueBank& bank,
                                std::vector<std::int64_t>& queue_grants,
                                std::int64_t budget) {
    std::int64_t granted = 0;
    for (int i = 0; i < bank.k() && budget > 0; ++i) {
        const std::int64_t room = bank.q[static_cast<std::size_t>(i)] - queue_grants[static_cast<std::size_t>(i)];
        const std::int64_t take = std::min(room, budget);
        if (take > 0) {
            queue_grants[static_cast<std::size_t>(i)] += take;
            granted += take;
            budget -= take;
        }
    }
    return granted;
}

std::int64_t remaining_class_backlog(const OnuReport& r, const OnuGrant& g, std::size_t cls) {
    std::int64_t total = 0;
    for (int i = 0; i < r.banks[cls].k(); ++i)
        total += r.banks[cls].q[static_cast<std::size_t>(i)] -
                 g.class_queue[cls][static_cast<std::size_t>(i)];
    return total;
}

// Distribute `total` packets of one class over ONUs by remaining backlog and
// apply oldest-first within each ONU. Returns packets actually granted.
std::int64_t distribute_class_budget(const std::vector<OnuReport>& reports,
                                     GrantSchedule& gs, std::size_t cls,
                                     std::int64_t total) {
    std::vector<std::int64_t> requests(reports.size());
    for (std::size_t o = 0; o < reports.size(); ++o)
        requests[o] = remaining_class_backlog(reports[o], gs.onus[o], cls);
    const std::vector<std::int64_t> shares = max_min_fair_distribute(total, requests);
    std::int64_t granted = 0;
    for (std::size_t o = 0; o < reports.size(); ++o)
        granted += grant_oldest_first(reports[o].banks[cls], gs.onus[o].class_queue[cls], shares[o]);
    return granted;
}

std::int64_t distribute_best_effort(const std::vector<OnuReport>& reports,
                                    GrantSchedule& gs, std::int64_t total) {
    std::vector<std::int64_t> requests(reports.size());
    for (std::size_t o = 0; o < reports.size(); ++o)
        requests[o] = reports[o].best_effort_backlog;
    const std::vector<std::int64_t> shares = max_min_fair_distribute(total, requests);
    std::int64_t granted = 0;
    for (std::size_t o = 0; o < reports.size(); ++o) {
        gs.onus[o].best_effort += shares[o];
        granted += shares[o];
    }
    return granted;
}

// Shared tail of the optimizing allocators: split each aggregate first-slot
// per-queue allocation across ONUs, most urgent queues first, then hand the
// slack to best effort.
GrantSchedule distribute_first_column(const std::vector<OnuReport>& reports,
                                      const std::vector<TrafficClassSpec>& specs,
                                      const SlotConfig& slot_cfg,
                                      const AllocationMatrix& alloc) {
    GrantSchedule gs = empty_schedule(reports);
    std::int64_t granted = 0;
    const int kmax = max_queue_depth(reports);
    for (int i = 1; i <= kmax; ++i) {
        for (std::size_t c = 0; c < specs.size(); ++c) {
            if (i > specs[c].k_slots) continue;
            const std::int64_t aggregate = alloc.at(static_cast<int>(c), i, 0);
            if (aggregate == 0) continue;
            std::vector<std::int64_t> requests(reports.size());
            for (std::size_t o = 0; o < reports.size(); ++o)
                requests[o] = reports[o].banks[c].q[static_cast<std::size_t>(i - 1)];
            const std::vector<std::int64_t> shares = max_min_fair_distribute(aggregate, requests);
            for (std::size_t o = 0; o < reports.size(); ++o) {
                gs.onus[o].class_queue[c][static_cast<std::size_t>(i - 1)] += shares[o];
                granted += shares[o];
            }
        }
    }
    distribute_best_effort(reports, gs, slot_cfg.lambda_packets - granted);
    return gs;
}

std::vector<VirtualQueueBank> aggregate_banks(const std::vector<OnuReport>& reports,
                                              const std::vector<TrafficClassSpec>& specs) {
    std::vector<VirtualQueueBank> agg;
    agg.reserve(specs.size());
    for (const TrafficClassSpec& spec : specs)
        agg.push_back(VirtualQueueBank::zeros(spec.k_slots));
    for (const OnuReport& r : reports) {
        if (r.banks.size() != specs.size())
            throw DimensionMismatchError("report has wrong class count");
        for (std::size_t c = 0; c < specs.size(); ++c) {
            if (r.banks[c].k() != specs[c].k_slots)
                throw DimensionMismatchError("report bank depth != k_slots");
            for (int i = 0; i < specs[c].k_slots; ++i)
                agg[c].q[static_cast<std::size_t>(i)] += r.banks[c].q[static_cast<std::size_t>(i)];
        }
    }
    return agg;
}

} // namespace

std::int64_t GrantSchedule::fog_total() const {
    std::int64_t total = 0;
    for (const OnuGrant& g : onus) {
        for (const auto& per_queue : g.class_queue)
            total = std::accumulate(per_queue.begin(), per_queue.end(), total);
        total += g.best_effort;
    }
    return total;
}

std::int64_t GrantSchedule::olt_total() const {
    std::int64_t total = 0;
    for (const OnuGrant& g : onus) {
        for (const auto& per_queue : g.olt_class_queue)
            total = std::accumulate(per_queue.begin(), per_queue.end(), total);
        total += g.olt_best_effort;
    }
    return total;
}

bool GrantSchedule::has_olt_overlay() const {
    for (const OnuGrant& g : onus)
        if (!g.olt_class_queue.empty() || g.olt_best_effort > 0) return true;
    return false;
}

std::vector<std::int64_t> max_min_fair_distribute(std::int64_t total,
                                                  const std::vector<std::int64_t>& requests) {
    if (total < 0)
        throw Error("max_min_fair_distribute: negative total");
    for (std::int64_t r : requests)
        if (r < 0) throw Error("max_min_fair_distribute: negative request");

    const std::size_t n = requests.size();
    std::vector<std::int64_t> grants(n, 0);
    if (n == 0) return grants;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return requests[a] < requests[b]; });

    std::int64_t remaining = total;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::int64_t left = static_cast<std::int64_t>(n - pos);
        const std::size_t i = order[pos];
        if (requests[i] * left <= remaining) {
            grants[i] = requests[i];
            remaining -= requests[i];
        } else {
            // fair level reached: everyone still unsatisfied gets the floor
            // share, remainders one packet each to the lowest ONU ids
            const std::int64_t base = remaining / left;
            std::int64_t extra = remaining % left;
            std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(pos), order.end());
            std::sort(rest.begin(), rest.end());
            for (std::size_t j : rest) {
                grants[j] = base + (extra > 0 ? 1 : 0);
                if (extra > 0) --extra;
            }
            remaining = 0;
            break;
        }
    }
    return grants;
}

GrantSchedule mpc_allocate(const std::vector<OnuReport>& reports,
                           const std::vector<TrafficClassSpec>& specs,
                           const SlotConfig& slot_cfg,
                           const std::vector<std::vector<std::int64_t>>& predictions) {
    if (reports.empty()) return {};
    const std::vector<VirtualQueueBank> agg = aggregate_banks(reports, specs);
    const LpInstance inst = build_mpc_program(agg, specs, slot_cfg, predictions);
    const LpSolution sol = solve_lp(inst);
    const AllocationMatrix alloc = to_allocation_matrix(inst, sol.values, specs);
    return distribute_first_column(reports, specs, slot_cfg, alloc);
}

GrantSchedule myopic_allocate(const std::vector<OnuReport>& reports,
                              const std::vector<TrafficClassSpec>& specs,
                              const SlotConfig& slot_cfg) {
    if (reports.empty()) return {};
    const std::vector<VirtualQueueBank> agg = aggregate_banks(reports, specs);
    SlotConfig myopic_cfg = slot_cfg;
    myopic_cfg.horizon = 0;
    const MyopicSolution sol = solve_myopic_maxflow(agg, specs, myopic_cfg);
    return distribute_first_column(reports, specs, slot_cfg, sol.alloc);
}

GrantSchedule fixed_tdm_allocate(const std::vector<OnuReport>& reports,
                                 const SlotConfig& slot_cfg, int n_onus) {
    if (n_onus < 1)
        throw Error("fixed_tdm_allocate: n_onus must be >= 1");
    GrantSchedule gs = empty_schedule(reports);
    const std::int64_t share = slot_cfg.lambda_packets / n_onus;
    const int kmax = max_queue_depth(reports);
    for (std::size_t o = 0; o < reports.size(); ++o) {
        std::int64_t budget = share;
        // earliest residual deadline first, class order breaking ties
        for (int i = 1; i <= kmax && budget > 0; ++i) {
            for (std::size_t c = 0; c < reports[o].banks.size() && budget > 0; ++c) {
                if (i > reports[o].banks[c].k()) continue;
                const std::int64_t room =
                    reports[o].banks[c].q[static_cast<std::size_t>(i - 1)] -
                    gs.onus[o].class_queue[c][static_cast<std::size_t>(i - 1)];
                const std::int64_t take = std::min(room, budget);
                gs.onus[o].class_queue[c][static_cast<std::size_t>(i - 1)] += take;
                budget -= take;
            }
        }
        gs.onus[o].best_effort = std::min<std::int64_t>(budget, reports[o].best_effort_backlog);
    }
    return gs;
}

GrantSchedule assured_allocate(const std::vector<OnuReport>& reports,
                               const std::vector<TrafficClassSpec>& specs,
                               const SlotConfig& slot_cfg) {
    GrantSchedule gs = empty_schedule(reports);
    if (reports.empty()) return gs;
    std::int64_t leftover = slot_cfg.lambda_packets;
    // phase 1: per-class assured budgets, split by backlog
    for (std::size_t c = 0; c < specs.size(); ++c) {
        const std::int64_t budget = std::min(
            leftover,
            compute_lambda(specs[c].bandwidth_bps, slot_cfg.slot_s, slot_cfg.packet_bits));
        leftover -= distribute_class_budget(reports, gs, c, budget);
    }
    // phase 2: leftover serves remaining backlog, class priority order
    for (std::size_t c = 0; c < specs.size() && leftover > 0; ++c)
        leftover -= distribute_class_budget(reports, gs, c, leftover);
    if (leftover > 0) distribute_best_effort(reports, gs, leftover);
    return gs;
}

GrantSchedule priority_allocate(const std::vector<OnuReport>& reports,
                                const std::vector<TrafficClassSpec>& specs,
                                const SlotConfig& slot_cfg, double slice_fraction) {
    if (slice_fraction < 0.0 || slice_fraction > 1.0)
        throw Error("priority_allocate: slice_fraction outside [0,1]");
    GrantSchedule gs = empty_schedule(reports);
    if (reports.empty()) return gs;
    std::int64_t slice = static_cast<std::int64_t>(
        std::floor(slice_fraction * static_cast<double>(slot_cfg.lambda_packets) + 1e-9));
    std::int64_t used = 0;
    for (std::size_t c = 0; c < specs.size() && slice > 0; ++c) {
        const std::int64_t granted = distribute_class_budget(reports, gs, c, slice);
        slice -= granted;
        used += granted;
    }
    distribute_best_effort(reports, gs, slot_cfg.lambda_packets - used);
    return gs;
}

GrantSchedule oob_allocate(const std::vector<OnuReport>& reports,
                           const SlotConfig& slot_cfg, double olt_window_fraction) {
    if (olt_window_fraction <= 0.0 || olt_window_fraction > 1.0)
        throw Error("oob_allocate: olt_window_fraction outside (0,1]");
    GrantSchedule gs = empty_schedule(reports);
    if (reports.empty()) return gs;
    const std::int64_t window = slot_cfg.lambda_packets / static_cast<std::int64_t>(reports.size());
    for (std::size_t o = 0; o < reports.size(); ++o) {
        const OnuReport& r = reports[o];
        OnuGrant& g = gs.onus[o];
        g.olt_class_queue.resize(r.banks.size());
        for (std::size_t c = 0; c < r.banks.size(); ++c)
            g.olt_class_queue[c].assign(static_cast<std::size_t>(r.banks[c].k()), 0);

        // OLT upstream: everything except class 1, oldest first, then best
        // effort, inside the ONU's fixed window
        std::int64_t budget = window;
        const int kmax = max_queue_depth(reports);
        for (int i = 1; i <= kmax && budget > 0; ++i) {
            for (std::size_t c = 1; c < r.banks.size() && budget > 0; ++c) {
                if (i > r.banks[c].k()) continue;
                const std::int64_t room = r.banks[c].q[static_cast<std::size_t>(i - 1)] -
                                          g.olt_class_queue[c][static_cast<std::size_t>(i - 1)];
                const std::int64_t take = std::min(room, budget);
                g.olt_class_queue[c][static_cast<std::size_t>(i - 1)] += take;
                budget -= take;
            }
        }
        g.olt_best_effort = std::min<std::int64_t>(budget, r.best_effort_backlog);
        const std::int64_t olt_used = window - budget + g.olt_best_effort;

        // fog grant rides on the OLT transmission: no OLT traffic, no fog slot
        const std::int64_t fog_cap = static_cast<std::int64_t>(
            std::floor(olt_window_fraction * static_cast<double>(olt_used) + 1e-9));
        if (!r.banks.empty())
            grant_oldest_first(r.banks[0], g.class_queue[0], fog_cap);
    }
    return gs;
}

GrantSchedule allocate_by_name(const std::string& name,
                               const std::vector<OnuReport>& reports,
                               const std::vector<TrafficClassSpec>& specs,
                               const SlotConfig& slot_cfg,
                               const std::vector<std::vector<std::int64_t>>& predictions,
                               const AllocatorParams& params) {
    if (name == "mpc") return mpc_allocate(reports, specs, slot_cfg, predictions);
    if (name == "myopic") return myopic_allocate(reports, specs, slot_cfg);
    if (name == "fixed") return fixed_tdm_allocate(reports, slot_cfg, static_cast<int>(reports.size()));
    if (name == "assured") return assured_allocate(reports, specs, slot_cfg);
    if (name == "priority") return priority_allocate(reports, specs, slot_cfg, params.slice_fraction);
    if (name == "oob") return oob_allocate(reports, slot_cfg, params.olt_window_fraction);
    throw InvalidScenarioError("unknown allocator: " + name);
}

bool is_known_allocator(const std::string& name) {
    return name == "mpc" || name == "myopic" || name == "fixed" || name == "assured" ||
           name == "priority" || name == "oob";
}

} // namespace ponmpc
