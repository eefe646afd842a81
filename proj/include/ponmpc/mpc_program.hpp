#ifndef PONMPC_MPC_PROGRAM_HPP
#define PONMPC_MPC_PROGRAM_HPP

#include <cstdint>
#include <vector>

#include "ponmpc/lp.hpp"
#include "ponmpc/virtual_queue.hpp"

namespace ponmpc {

// x[c][i-1][t]: packets allocated from virtual queue i of class c in slot t.
struct AllocationMatrix {
    std::vector<std::vector<std::vector<std::int64_t>>> x;

    std::int64_t at(int cls, int queue, int slot) const {
        return x[static_cast<std::size_t>(cls)][static_cast<std::size_t>(queue - 1)][static_cast<std::size_t>(slot)];
    }
    std::int64_t class_total(int cls) const;
};

// First-slot allocations for the most critical queues, clamped so the fixed
// assignments can never make the program infeasible: classes are served in
// ascending id order and each value is capped by the class SLA budget and the
// slot budget left by preceding classes.
std::vector<std::int64_t> clamp_first_allocations(const std::vector<VirtualQueueBank>& banks,
                                                  const std::vector<TrafficClassSpec>& specs,
                                                  std::int64_t lambda);

// Builds the horizon allocation program. Queue-state variables are eliminated
// recursively, leaving one inequality per (class, queue, slot) whose
// right-hand side is an initial queue level or a predicted arrival count,
// plus per-slot capacity rows and per-class horizon budget rows.
// predicted_arrivals[c] must hold exactly `horizon` entries.
LpInstance build_mpc_program(const std::vector<VirtualQueueBank>& banks,
                             const std::vector<TrafficClassSpec>& specs,
                             const SlotConfig& slot_cfg,
                             const std::vector<std::vector<std::int64_t>>& predicted_arrivals);

// Extracts the 0/1 constraint matrix (dense) of an instance, rows in build
// order, columns in variable order.
std::vector<std::vector<int>> constraint_matrix(const LpInstance& inst);

// Shapes an LP solution vector back into an AllocationMatrix.
AllocationMatrix to_allocation_matrix(const LpInstance& inst,
                                      const std::vector<std::int64_t>& values,
                                      const std::vector<TrafficClassSpec>& specs);

struct MyopicSolution {
    AllocationMatrix alloc;     // single slot (t = 0)
    std::int64_t objective = 0; // excludes the forced first-queue values
};

// Single-slot optimum via the equivalent flow network: per-class parallel
// edges of capacity Q_i(0) for i >= 2, a per-class budget edge of capacity
// min(lambda, lambda_c) - x1, and a shared final edge of capacity
// lambda - sum(x1).
MyopicSolution solve_myopic_maxflow(const std::vector<VirtualQueueBank>& banks,
                                    const std::vector<TrafficClassSpec>& specs,
                                    const SlotConfig& slot_cfg);

} // namespace ponmpc

#endif
