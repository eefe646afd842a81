#include "ponmpc/mpc_program.hpp"

#include <algorithm>
#include <string>

#include "ponmpc/errors.hpp"
#include "ponmpc/max_flow.hpp"

namespace ponmpc {

std::int64_t AllocationMatrix::class_total(int cls) const {
    std::int64_t total = 0;
    for (const auto& per_queue : x[static_cast<std::size_t>(cls)])
        for (std::int64_t v : per_queue) total += v;
    return total;
}

std::vector<std::int64_t> clamp_first_allocations(const std::vector<VirtualQueueBank>& banks,
                                                  const std::vector<TrafficClassSpec>& specs,
                                                  std::int64_t lambda) {
    if (banks.size() != specs.size())
        throw DimensionMismatchError("clamp_first_allocations: banks/specs size mismatch");
    std::vector<std::int64_t> forced(banks.size(), 0);
    std::int64_t remaining = lambda;
    for (std::size_t c = 0; c < banks.size(); ++c) {
        std::int64_t f = mandatory_first_allocation(banks[c].q.at(0), lambda);
        f = std::min(f, specs[c].lambda_c_packets);
        f = std::min(f, remaining);
        forced[c] = f;
        remaining -= f;
    }
    return forced;
}

LpInstance build_mpc_program(const std::vector<VirtualQueueBank>& banks,
                             const std::vector<TrafficClassSpec>& specs,
                             const SlotConfig& slot_cfg,
                             const std::vector<std::vector<std::int64_t>>& predicted_arrivals) {
    const int ncls = static_cast<int>(specs.size());
    const int h = slot_cfg.horizon;
    if (static_cast<int>(banks.size()) != ncls ||
        static_cast<int>(predicted_arrivals.size()) != ncls)
        throw DimensionMismatchError("build_mpc_program: banks/specs/predictions size mismatch");
    if (ncls == 0)
        throw DimensionMismatchError("build_mpc_program: no traffic classes");
    if (slot_cfg.lambda_packets < 0 || h < 0)
        throw Error("build_mpc_program: negative slot budget or horizon");
    for (const TrafficClassSpec& spec : specs)
        if (spec.lambda_c_packets < 0 || spec.k_slots < 1)
            throw Error("build_mpc_program: invalid class spec");
    for (int c = 0; c < ncls; ++c) {
        if (banks[static_cast<std::size_t>(c)].k() != specs[static_cast<std::size_t>(c)].k_slots)
            throw DimensionMismatchError("build_mpc_program: bank depth != k_slots for class " +
                                         std::to_string(c + 1));
        if (static_cast<int>(predicted_arrivals[static_cast<std::size_t>(c)].size()) != h)
            throw DimensionMismatchError("build_mpc_program: need exactly H predicted slots");
        for (std::int64_t a : predicted_arrivals[static_cast<std::size_t>(c)])
            if (a < 0) throw NegativeArrivalError("build_mpc_program: negative predicted arrival");
        for (std::int64_t qv : banks[static_cast<std::size_t>(c)].q)
            if (qv < 0) throw Error("build_mpc_program: negative queue state");
    }

    LpInstance inst;

    // variable order matches the canonical column layout: slot-major, then
    // class, then queue index
    std::vector<std::vector<int>> var_index(static_cast<std::size_t>(ncls));
    for (int c = 0; c < ncls; ++c)
        var_index[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(specs[static_cast<std::size_t>(c)].k_slots));
    int nv = 0;
    for (int t = 0; t <= h; ++t) {
        for (int c = 0; c < ncls; ++c) {
            for (int i = 1; i <= specs[static_cast<std::size_t>(c)].k_slots; ++i) {
                // var_index holds the base id at t=0; ids advance by the slot stride
                if (t == 0) var_index[static_cast<std::size_t>(c)][static_cast<std::size_t>(i - 1)] = nv;
                inst.keys.push_back({c, i, t});
                ++nv;
            }
        }
    }
    inst.num_vars = nv;
    inst.objective.assign(static_cast<std::size_t>(nv), 1.0);

    int slot_stride = 0;
    for (int c = 0; c < ncls; ++c) slot_stride += specs[static_cast<std::size_t>(c)].k_slots;
    auto var = [&](int c, int i, int t) {
        return var_index[static_cast<std::size_t>(c)][static_cast<std::size_t>(i - 1)] + t * slot_stride;
    };

    // queue bounds: walking (i, t) -> (i+1, t-1) until the initial state or an
    // arrival term is reached
    for (int t = 0; t <= h; ++t) {
        for (int c = 0; c < ncls; ++c) {
            const int k = specs[static_cast<std::size_t>(c)].k_slots;
            for (int i = 1; i <= k; ++i) {
                LpRow row;
                const int m = std::min(k - i, t);
                for (int j = m; j >= 0; --j) {  // ascending variable ids
                    row.vars.push_back(var(c, i + j, t - j));
                    row.coefs.push_back(1);
                }
                if (t - m == 0)
                    row.rhs = banks[static_cast<std::size_t>(c)].q[static_cast<std::size_t>(i + m - 1)];
                else
                    row.rhs = predicted_arrivals[static_cast<std::size_t>(c)][static_cast<std::size_t>(t - m - 1)];
                inst.rows.push_back(std::move(row));
            }
        }
    }

    // per-class horizon budget
    for (int c = 0; c < ncls; ++c) {
        LpRow row;
        for (int t = 0; t <= h; ++t)
            for (int i = 1; i <= specs[static_cast<std::size_t>(c)].k_slots; ++i) {
                row.vars.push_back(var(c, i, t));
                row.coefs.push_back(1);
            }
        row.rhs = specs[static_cast<std::size_t>(c)].lambda_c_packets;
        inst.rows.push_back(std::move(row));
    }

    // per-slot link capacity
    for (int t = 0; t <= h; ++t) {
        LpRow row;
        for (int c = 0; c < ncls; ++c)
            for (int i = 1; i <= specs[static_cast<std::size_t>(c)].k_slots; ++i) {
                row.vars.push_back(var(c, i, t));
                row.coefs.push_back(1);
            }
        row.rhs = slot_cfg.lambda_packets;
        inst.rows.push_back(std::move(row));
    }

    const std::vector<std::int64_t> forced =
        clamp_first_allocations(banks, specs, slot_cfg.lambda_packets);
    for (int c = 0; c < ncls; ++c)
        inst.fixed.push_back({var(c, 1, 0), forced[static_cast<std::size_t>(c)]});
    std::sort(inst.fixed.begin(), inst.fixed.end());

    return inst;
}

std::vector<std::vector<int>> constraint_matrix(const LpInstance& inst) {
    std::vector<std::vector<int>> m(inst.rows.size(),
                                    std::vector<int>(static_cast<std::size_t>(inst.num_vars), 0));
    for (std::size_t r = 0; r < inst.rows.size(); ++r)
        for (std::size_t t = 0; t < inst.rows[r].vars.size(); ++t)
            m[r][static_cast<std::size_t>(inst.rows[r].vars[t])] = inst.rows[r].coefs[t];
    return m;
}

AllocationMatrix to_allocation_matrix(const LpInstance& inst,
                                      const std::vector<std::int64_t>& values,
                                      const std::vector<TrafficClassSpec>& specs) {
    if (values.size() != static_cast<std::size_t>(inst.num_vars) ||
        inst.keys.size() != static_cast<std::size_t>(inst.num_vars))
        throw DimensionMismatchError("to_allocation_matrix: size mismatch");
    int h = 0;
    for (const LpVarKey& key : inst.keys) h = std::max(h, key.slot);

    AllocationMatrix am;
    am.x.resize(specs.size());
    for (std::size_t c = 0; c < specs.size(); ++c)
        am.x[c].assign(static_cast<std::size_t>(specs[c].k_slots),
                       std::vector<std::int64_t>(static_cast<std::size_t>(h + 1), 0));
    for (int v = 0; v < inst.num_vars; ++v) {
        const LpVarKey& key = inst.keys[static_cast<std::size_t>(v)];
        am.x[static_cast<std::size_t>(key.cls)][static_cast<std::size_t>(key.queue - 1)]
            [static_cast<std::size_t>(key.slot)] = values[static_cast<std::size_t>(v)];
    }
    return am;
}

MyopicSolution solve_myopic_maxflow(const std::vector<VirtualQueueBank>& banks,
                                    const std::vector<TrafficClassSpec>& specs,
                                    const SlotConfig& slot_cfg) {
    const int ncls = static_cast<int>(specs.size());
    if (static_cast<int>(banks.size()) != ncls)
        throw DimensionMismatchError("solve_myopic_maxflow: banks/specs size mismatch");

    const std::int64_t lambda = slot_cfg.lambda_packets;
    const std::vector<std::int64_t> forced = clamp_first_allocations(banks, specs, lambda);
    std::int64_t forced_total = 0;
    for (std::int64_t f : forced) forced_total += f;
    if (forced_total > lambda)
        throw InternalError("solve_myopic_maxflow: forced allocations exceed slot budget");

    // nodes: S, per-class source, per-class collector, shared T2, T
    const int s = 0;
    const int t2 = 1;
    const int t = 2;
    const int base = 3;
    FlowNetwork net(base + 2 * ncls, s, t);

    std::vector<std::vector<int>> queue_edges(static_cast<std::size_t>(ncls));
    for (int c = 0; c < ncls; ++c) {
        const int sc = base + 2 * c;
        const int t1c = base + 2 * c + 1;
        const VirtualQueueBank& bank = banks[static_cast<std::size_t>(c)];
        std::int64_t demand = 0;
        for (int i = 2; i <= specs[static_cast<std::size_t>(c)].k_slots; ++i)
            demand += bank.q[static_cast<std::size_t>(i - 1)];
        net.add_edge(s, sc, demand);
        for (int i = 2; i <= specs[static_cast<std::size_t>(c)].k_slots; ++i)
            queue_edges[static_cast<std::size_t>(c)].push_back(
                net.add_edge(sc, t1c, bank.q[static_cast<std::size_t>(i - 1)]));
        const std::int64_t budget =
            std::min(lambda, specs[static_cast<std::size_t>(c)].lambda_c_packets) -
            forced[static_cast<std::size_t>(c)];
        if (budget < 0)
            throw InternalError("solve_myopic_maxflow: negative class budget edge");
        net.add_edge(t1c, t2, budget);
    }
    net.add_edge(t2, t, lambda - forced_total);

    const MaxFlowResult flow = max_flow(net);

    MyopicSolution sol;
    sol.objective = flow.value;
    sol.alloc.x.resize(static_cast<std::size_t>(ncls));
    for (int c = 0; c < ncls; ++c) {
        auto& per_class = sol.alloc.x[static_cast<std::size_t>(c)];
        per_class.assign(static_cast<std::size_t>(specs[static_cast<std::size_t>(c)].k_slots),
                         std::vector<std::int64_t>(1, 0));
        per_class[0][0] = forced[static_cast<std::size_t>(c)];
        for (int i = 2; i <= specs[static_cast<std::size_t>(c)].k_slots; ++i)
            per_class[static_cast<std::size_t>(i - 1)][0] =
                flow.edge_flow[static_cast<std::size_t>(
                    queue_edges[static_cast<std::size_t>(c)][static_cast<std::size_t>(i - 2)])];
    }
    return sol;
}

} // namespace ponmpc
