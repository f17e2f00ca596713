#pragma once

#include <vector>

namespace lod2 {

// s-t max flow on a directed graph, augmenting paths found by BFS phases
// (Dinic's blocking-flow variant). Capacities are doubles.
class MaxFlowGraph {
public:
    explicit MaxFlowGraph(int node_count);

    int node_count() const { return static_cast<int>(adj_.size()); }

    // Adds a directed edge u -> v; a residual reverse edge of capacity
    // rev_capacity is created alongside. Returns the edge index.
    int add_edge(int u, int v, double capacity, double rev_capacity = 0.0);

    double max_flow(int source, int sink);

    // After max_flow: true if the node is on the source side of the min cut.
    bool in_source_side(int node) const { return reachable_[node]; }

private:
    struct Edge {
        int to;
        double cap;
        int rev;  // index of the reverse edge in adj_[to]
    };
    std::vector<std::vector<Edge>> adj_;
    std::vector<int> level_;
    std::vector<size_t> iter_;
    std::vector<char> reachable_;

    bool bfs(int source, int sink);
    double dfs(int u, int sink, double pushed);
    void mark_reachable(int source);
};

}  // namespace lod2
