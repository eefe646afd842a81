#ifndef PONMPC_MAX_FLOW_HPP
#define PONMPC_MAX_FLOW_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ponmpc {

class FlowNetwork;

struct MaxFlowResult {
    std::int64_t value = 0;
    std::vector<std::int64_t> edge_flow;  // per user edge id
};

// Dinic's algorithm; integral flows for integral capacities.
MaxFlowResult max_flow(const FlowNetwork& net);

// Directed network with integral capacities. Edges keep insertion order so
// callers can read back per-edge flows.
class FlowNetwork {
public:
    explicit FlowNetwork(int num_nodes, int source, int sink);

    // returns the edge id used to query flow_on() later
    int add_edge(int from, int to, std::int64_t capacity);

    int num_nodes() const { return static_cast<int>(adj_.size()); }
    int source() const { return source_; }
    int sink() const { return sink_; }
    int num_edges() const { return static_cast<int>(cap_.size() / 2); }

    std::int64_t capacity_of(int edge_id) const { return cap_orig_[static_cast<std::size_t>(edge_id)]; }

    std::string debug_dump() const;

private:
    friend MaxFlowResult max_flow(const FlowNetwork& net);

    int source_;
    int sink_;
    std::vector<std::vector<int>> adj_;  // indices into the interleaved edge arrays
    std::vector<int> head_;
    std::vector<std::int64_t> cap_;       // residual layout: 2*i forward, 2*i+1 reverse
    std::vector<std::int64_t> cap_orig_;  // original capacity per user edge
};

} // namespace ponmpc

#endif
