#include "lod2/maxflow.hpp"

#include <limits>
#include <queue>

namespace lod2 {

MaxFlowGraph::MaxFlowGraph(int node_count) : adj_(node_count) {}

int MaxFlowGraph::add_edge(int u, int v, double capacity, double rev_capacity) {
    adj_[u].push_back({v, capacity, static_cast<int>(adj_[v].size())});
    adj_[v].push_back({u, rev_capacity, static_cast<int>(adj_[u].size()) - 1});
    return static_cast<int>(adj_[u].size()) - 1;
}

bool MaxFlowGraph::bfs(int source, int sink) {
    level_.assign(adj_.size(), -1);
    std::queue<int> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (const Edge& e : adj_[u]) {
            if (e.cap > 1e-12 && level_[e.to] < 0) {
                level_[e.to] = level_[u] + 1;
                q.push(e.to);
            }
        }
    }
    return level_[sink] >= 0;
}

double MaxFlowGraph::dfs(int u, int sink, double pushed) {
    if (u == sink) return pushed;
    for (size_t& i = iter_[u]; i < adj_[u].size(); ++i) {
        Edge& e = adj_[u][i];
        if (e.cap > 1e-12 && level_[e.to] == level_[u] + 1) {
            double got = dfs(e.to, sink, std::min(pushed, e.cap));
            if (got > 0) {
                e.cap -= got;
                adj_[e.to][e.rev].cap += got;
                return got;
            }
        }
    }
    return 0.0;
}

double MaxFlowGraph::max_flow(int source, int sink) {
    double flow = 0.0;
    while (bfs(source, sink)) {
        iter_.assign(adj_.size(), 0);
        while (double pushed = dfs(source, sink, std::numeric_limits<double>::infinity()))
            flow += pushed;
    }
    mark_reachable(source);
    return flow;
}

void MaxFlowGraph::mark_reachable(int source) {
    reachable_.assign(adj_.size(), 0);
    std::queue<int> q;
    reachable_[source] = 1;
    q.push(source);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (const Edge& e : adj_[u]) {
            if (e.cap > 1e-12 && !reachable_[e.to]) {
                reachable_[e.to] = 1;
                q.push(e.to);
            }
        }
    }
}

}  // namespace lod2
