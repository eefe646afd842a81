#ifndef PONMPC_LP_HPP
#define PONMPC_LP_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ponmpc {

// Canonical allocation program: maximize c.x subject to Ax <= b, x >= 0,
// with a set of variables pinned to fixed values. Coefficients are small
// non-negative integers and right-hand sides are integral by construction.
struct LpRow {
    std::vector<std::int32_t> vars;   // variable indices, strictly increasing
    std::vector<std::int32_t> coefs;  // parallel to vars
    std::int64_t rhs = 0;
};

struct LpVarKey {
    int cls = 0;    // class index (0-based)
    int queue = 0;  // virtual queue, 1-based
    int slot = 0;   // horizon slot, 0-based
};

struct LpInstance {
    int num_vars = 0;
    std::vector<double> objective;                         // length num_vars
    std::vector<LpRow> rows;
    std::vector<std::pair<std::int32_t, std::int64_t>> fixed;  // sorted by var
    std::vector<LpVarKey> keys;                            // optional metadata

    std::string debug_dump() const;
};

struct LpSolution {
    std::int64_t objective = 0;
    std::vector<std::int64_t> values;  // length num_vars, fixed vars included
};

struct LpRelaxedSolution {
    double objective = 0.0;
    std::vector<double> values;
};

// Primal simplex (dense tableau, Bland's rule) on the relaxation. The
// instances produced by the program builder always admit the all-slack basis,
// so no phase-1 is needed.
LpRelaxedSolution solve_lp_relaxed(const LpInstance& inst);

// Relaxation plus the integrality contract: every component must be within
// 1e-6 of an integer (guaranteed for totally unimodular programs); values are
// rounded and every constraint re-verified in exact integer arithmetic.
LpSolution solve_lp(const LpInstance& inst);

// Exhaustive integer optimum over the box implied by single-variable caps.
// Guarded: throws SearchSpaceTooLargeError above `max_points`.
std::int64_t brute_force_ilp(const LpInstance& inst,
                             std::int64_t max_points = 100000000LL);

// Number of lattice points brute_force_ilp would enumerate.
double brute_force_search_space(const LpInstance& inst);

} // namespace ponmpc

#endif
