#include "ponmpc/max_flow.hpp"

#include <limits>
#include <queue>
#include <sstream>

#include "ponmpc/errors.hpp"

namespace ponmpc {

FlowNetwork::FlowNetwork(int num_nodes, int source, int sink)
    : source_(source), sink_(sink), adj_(static_cast<std::size_t>(num_nodes)) {
    if (source < 0 || source >= num_nodes || sink < 0 || sink >= num_nodes || source == sink)
        throw Error("FlowNetwork: bad terminals");
}

int FlowNetwork::add_edge(int from, int to, std::int64_t capacity) {
    if (from < 0 || from >= num_nodes() || to < 0 || to >= num_nodes())
        throw Error("FlowNetwork: edge endpoint out of range");
    if (capacity < 0)
        throw Error("FlowNetwork: negative capacity");
    if (to == source_ || from == sink_)
        throw Error("FlowNetwork: source must have no in-edges, sink no out-edges");
    const int id = static_cast<int>(cap_orig_.size());
    adj_[static_cast<std::size_t>(from)].push_back(static_cast<int>(cap_.size()));
    head_.push_back(to);
    cap_.push_back(capacity);
    adj_[static_cast<std::size_t>(to)].push_back(static_cast<int>(cap_.size()));
    head_.push_back(from);
    cap_.push_back(0);
    cap_orig_.push_back(capacity);
    return id;
}

namespace {

struct Dinic {
    const std::vector<std::vector<int>>& adj;
    const std::vector<int>& head;
    std::vector<std::int64_t> cap;
    std::vector<int> level;
    std::vector<std::size_t> it;
    int s, t;

    bool bfs() {
        level.assign(adj.size(), -1);
        std::queue<int> q;
        q.push(s);
        level[static_cast<std::size_t>(s)] = 0;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int e : adj[static_cast<std::size_t>(u)]) {
                const int v = head[static_cast<std::size_t>(e)];
                if (cap[static_cast<std::size_t>(e)] > 0 && level[static_cast<std::size_t>(v)] < 0) {
                    level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
                    q.push(v);
                }
            }
        }
        return level[static_cast<std::size_t>(t)] >= 0;
    }

    std::int64_t dfs(int u, std::int64_t pushed) {
        if (u == t) return pushed;
        for (std::size_t& i = it[static_cast<std::size_t>(u)]; i < adj[static_cast<std::size_t>(u)].size(); ++i) {
            const int e = adj[static_cast<std::size_t>(u)][i];
            const int v = head[static_cast<std::size_t>(e)];
            if (cap[static_cast<std::size_t>(e)] <= 0 ||
                level[static_cast<std::size_t>(v)] != level[static_cast<std::size_t>(u)] + 1)
                continue;
            const std::int64_t got = dfs(v, std::min(pushed, cap[static_cast<std::size_t>(e)]));
            if (got > 0) {
                cap[static_cast<std::size_t>(e)] -= got;
                cap[static_cast<std::size_t>(e ^ 1)] += got;
                return got;
            }
        }
        return 0;
    }
};

} // namespace

MaxFlowResult max_flow(const FlowNetwork& net) {
    Dinic d{net.adj_, net.head_, net.cap_, {}, {}, net.source_, net.sink_};
    MaxFlowResult out;
    while (d.bfs()) {
        d.it.assign(net.adj_.size(), 0);
        while (true) {
            const std::int64_t got = d.dfs(d.s, std::numeric_limits<std::int64_t>::max());
            if (got == 0) break;
            out.value += got;
        }
    }
    out.edge_flow.resize(static_cast<std::size_t>(net.num_edges()));
    for (int id = 0; id < net.num_edges(); ++id)
        out.edge_flow[static_cast<std::size_t>(id)] =
            net.cap_orig_[static_cast<std::size_t>(id)] - d.cap[static_cast<std::size_t>(2 * id)];
    return out;
}

std::string FlowNetwork::debug_dump() const {
    std::ostringstream os;
    os << "flow network: " << num_nodes() << " nodes, " << num_edges()
       << " edges, S=" << source_ << " T=" << sink_ << '\n';
    for (int id = 0; id < num_edges(); ++id) {
        const int e = 2 * id;
        os << "  " << head_[static_cast<std::size_t>(e ^ 1)] << " -> "
           << head_[static_cast<std::size_t>(e)] << " cap " << cap_orig_[static_cast<std::size_t>(id)] << '\n';
    }
    return os.str();
}

} // namespace ponmpc
