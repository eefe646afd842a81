#include <doctest.h>

#include <algorithm>
#include <array>

#include "ponmpc/errors.hpp"
#include "ponmpc/lp.hpp"
#include "ponmpc/max_flow.hpp"
#include "ponmpc/rng.hpp"

using namespace ponmpc;

namespace {

// exhaustive min-cut over source-side subsets, for cross-checking small nets
std::int64_t brute_force_min_cut(int n, int s, int t,
                                 const std::vector<std::array<std::int64_t, 3>>& edges) {
    std::int64_t best = -1;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (!(mask & (1u << s)) || (mask & (1u << t))) continue;
        std::int64_t cut = 0;
        for (const auto& e : edges)
            if ((mask & (1u << e[0])) && !(mask & (1u << e[1]))) cut += e[2];
        if (best < 0 || cut < best) best = cut;
    }
    return best;
}

} // namespace

TEST_CASE("single edge carries its capacity") {
    FlowNetwork net(2, 0, 1);
    const int e = net.add_edge(0, 1, 7);
    const MaxFlowResult res = max_flow(net);
    CHECK(res.value == 7);
    CHECK(res.edge_flow[static_cast<std::size_t>(e)] == 7);
}

TEST_CASE("diamond network saturates the min cut") {
    // S -> a (3), S -> b (2), a -> T (2), b -> T (3): max flow 4
    FlowNetwork net(4, 0, 3);
    net.add_edge(0, 1, 3);
    net.add_edge(0, 2, 2);
    net.add_edge(1, 3, 2);
    net.add_edge(2, 3, 3);
    CHECK(max_flow(net).value == 4);
}

TEST_CASE("zero-capacity network carries nothing") {
    FlowNetwork net(3, 0, 2);
    net.add_edge(0, 1, 0);
    net.add_edge(1, 2, 0);
    CHECK(max_flow(net).value == 0);
}

TEST_CASE("terminal constraints are enforced") {
    FlowNetwork net(3, 0, 2);
    CHECK_THROWS_AS(net.add_edge(1, 0, 3), Error);  // into the source
    CHECK_THROWS_AS(net.add_edge(2, 1, 3), Error);  // out of the sink
    CHECK_THROWS_AS(net.add_edge(0, 1, -1), Error);
}

TEST_CASE("random networks match the exhaustive min cut") {
    Rng rng(505);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 7));
        const int s = 0;
        const int t = n - 1;
        std::vector<std::array<std::int64_t, 3>> edges;
        FlowNetwork net(n, s, t);
        const int m = static_cast<int>(rng.uniform_int(1, 12));
        for (int e = 0; e < m; ++e) {
            const int u = static_cast<int>(rng.uniform_int(0, n - 1));
            const int v = static_cast<int>(rng.uniform_int(0, n - 1));
            if (u == v || v == s || u == t) continue;
            const std::int64_t cap = rng.uniform_int(0, 9);
            net.add_edge(u, v, cap);
            edges.push_back({u, v, cap});
        }
        const MaxFlowResult res = max_flow(net);
        CHECK(res.value == brute_force_min_cut(n, s, t, edges));

        // flow conservation and capacity discipline
        std::vector<std::int64_t> balance(static_cast<std::size_t>(n), 0);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            CHECK(res.edge_flow[e] >= 0);
            CHECK(res.edge_flow[e] <= edges[e][2]);
            balance[static_cast<std::size_t>(edges[e][0])] -= res.edge_flow[e];
            balance[static_cast<std::size_t>(edges[e][1])] += res.edge_flow[e];
        }
        for (int v = 0; v < n; ++v)
            if (v != s && v != t) CHECK(balance[static_cast<std::size_t>(v)] == 0);
        CHECK(balance[static_cast<std::size_t>(t)] == res.value);
    }
}

TEST_CASE("simplex solves a saturating box program") {
    // max x0 + x1 s.t. x0 <= 4, x1 <= 9, x0 + x1 <= 11
    LpInstance inst;
    inst.num_vars = 2;
    inst.objective = {1.0, 1.0};
    inst.rows = {{{0}, {1}, 4}, {{1}, {1}, 9}, {{0, 1}, {1, 1}, 11}};
    const LpSolution sol = solve_lp(inst);
    CHECK(sol.objective == 11);
    CHECK(sol.values[0] + sol.values[1] == 11);
}

TEST_CASE("fixed variables are substituted and excluded from the objective") {
    LpInstance inst;
    inst.num_vars = 2;
    inst.objective = {1.0, 1.0};
    inst.rows = {{{0}, {1}, 5}, {{1}, {1}, 9}, {{0, 1}, {1, 1}, 8}};
    inst.fixed = {{0, 5}};
    const LpSolution sol = solve_lp(inst);
    CHECK(sol.values[0] == 5);
    CHECK(sol.values[1] == 3);
    CHECK(sol.objective == 3);
}

TEST_CASE("zero right-hand sides pin their variables") {
    LpInstance inst;
    inst.num_vars = 3;
    inst.objective = {1.0, 1.0, 1.0};
    inst.rows = {{{0}, {1}, 0}, {{0, 1}, {1, 1}, 6}, {{1, 2}, {1, 1}, 4}};
    const LpSolution sol = solve_lp(inst);
    CHECK(sol.values[0] == 0);
    CHECK(sol.objective == 4);
}

TEST_CASE("infeasible fixed assignments are rejected") {
    LpInstance inst;
    inst.num_vars = 1;
    inst.objective = {1.0};
    inst.rows = {{{0}, {1}, 2}};
    inst.fixed = {{0, 5}};
    CHECK_THROWS_AS(solve_lp(inst), Error);
}

TEST_CASE("brute force enumerates small boxes exactly") {
    LpInstance empty;
    CHECK(brute_force_ilp(empty) == 0);

    LpInstance single;
    single.num_vars = 1;
    single.objective = {1.0};
    single.rows = {{{0}, {1}, 6}};
    CHECK(brute_force_ilp(single) == 6);

    LpInstance guarded;
    guarded.num_vars = 8;
    guarded.objective.assign(8, 1.0);
    for (int v = 0; v < 8; ++v) guarded.rows.push_back({{v}, {1}, 20});
    CHECK_THROWS_AS(brute_force_ilp(guarded, 1000), SearchSpaceTooLargeError);
}

TEST_CASE("debug dumps carry the tableau and the edge list") {
    LpInstance inst;
    inst.num_vars = 1;
    inst.objective = {1.0};
    inst.rows = {{{0}, {1}, 6}};
    CHECK(inst.debug_dump().find("<= 6") != std::string::npos);

    FlowNetwork net(2, 0, 1);
    net.add_edge(0, 1, 3);
    CHECK(net.debug_dump().find("0 -> 1 cap 3") != std::string::npos);
}
