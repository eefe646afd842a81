#ifndef PONMPC_UNIMODULAR_HPP
#define PONMPC_UNIMODULAR_HPP

#include <vector>

namespace ponmpc {

using TernaryMatrix = std::vector<std::vector<int>>;

// Strips rows and columns holding a single +-1 entry, iterating to a
// fixpoint. The operation preserves total unimodularity in both directions,
// so it is used to shrink matrices ahead of the exhaustive check.
TernaryMatrix reduce_by_unit_rows(const TernaryMatrix& m);

// Ghouila-Houri criterion: for every row subset R there must be a partition
// R1 / R2 with column sums of sum(R1) - sum(R2) in {-1, 0, 1}. Exponential in
// the row count; guarded at 20 rows.
bool check_totally_unimodular_ghouila_houri(const TernaryMatrix& m);

} // namespace ponmpc

#endif
