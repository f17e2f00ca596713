#include "lod2/graphcut.hpp"

#include <cmath>

#include "lod2/maxflow.hpp"

namespace lod2 {

void LabelingProblem::validate() const {
    if (node_count < 1 || label_count < 1)
        throw InvalidInputError("labeling problem needs nodes and labels");
    if (static_cast<int>(data_cost.size()) != node_count)
        throw InvalidInputError("data_cost row count mismatch");
    for (const auto& row : data_cost)
        if (static_cast<int>(row.size()) != label_count)
            throw InvalidInputError("data_cost column count mismatch");
    if (lambda < 0) throw InvalidInputError("lambda must be nonnegative");
    for (const auto& e : edges) {
        if (e.i < 0 || e.i >= node_count || e.j < 0 || e.j >= node_count || e.i == e.j)
            throw InvalidInputError("edge references invalid nodes");
        if (!(e.weight >= 0) || !std::isfinite(e.weight))
            throw InvalidInputError("edge weight must be finite and nonnegative");
    }
    if (static_cast<int>(initial_labels.size()) != node_count)
        throw InvalidInputError("initial_labels length mismatch");
    for (int l : initial_labels)
        if (l < 0 || l >= label_count) throw InvalidInputError("initial label out of range");
}

double labeling_energy(const LabelingProblem& problem, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != problem.node_count)
        throw InvalidInputError("label vector length mismatch");
    double e = 0.0;
    for (int i = 0; i < problem.node_count; ++i) {
        int l = labels[i];
        if (l < 0 || l >= problem.label_count)
            throw InvalidInputError("label out of range");
        e += problem.data_cost[i][l];
    }
    for (const auto& edge : problem.edges)
        if (labels[edge.i] != labels[edge.j]) e += problem.lambda * edge.weight;
    return e;
}

namespace {

// One alpha-expansion move, solved exactly as a binary min cut. Binary
// variable x_i = 1 means node i switches to alpha, 0 means it keeps its
// current label. x_i = 1 corresponds to the sink side of the cut.
std::vector<int> expansion_move(const LabelingProblem& p, const std::vector<int>& labels,
                                int alpha) {
    int n = p.node_count;
    int source = n, sink = n + 1;
    MaxFlowGraph graph(n + 2);
    std::vector<double> cap_s(n, 0.0), cap_t(n, 0.0);
    for (int i = 0; i < n; ++i) {
        cap_s[i] += p.data_cost[i][alpha];      // paid when x_i = 1
        cap_t[i] += p.data_cost[i][labels[i]];  // paid when x_i = 0
    }
    for (const auto& edge : p.edges) {
        double w = p.lambda * edge.weight;
        if (w <= 0) continue;
        int li = labels[edge.i], lj = labels[edge.j];
        double a = (li != lj) ? w : 0.0;        // E(0,0)
        double b = (li != alpha) ? w : 0.0;     // E(0,1)
        double c = (lj != alpha) ? w : 0.0;     // E(1,0)
        // E(1,1) = 0. Potts is submodular, so b + c - a >= 0.
        cap_s[edge.i] += c - a;
        cap_s[edge.j] += -c;
        double e = b + c - a;
        if (e > 0) graph.add_edge(edge.i, edge.j, e);
    }
    for (int i = 0; i < n; ++i) {
        double excess = cap_s[i] - cap_t[i];
        if (excess >= 0)
            graph.add_edge(source, i, excess);
        else
            graph.add_edge(i, sink, -excess);
    }
    graph.max_flow(source, sink);
    std::vector<int> out = labels;
    for (int i = 0; i < n; ++i)
        if (!graph.in_source_side(i)) out[i] = alpha;
    return out;
}

}  // namespace

LabelingResult solve_labeling(const LabelingProblem& problem) {
    problem.validate();
    LabelingResult result;
    result.labels = problem.initial_labels;
    result.energy = labeling_energy(problem, result.labels);
    if (problem.lambda == 0.0 || problem.edges.empty()) {
        // Nodes decouple: per-node argmin, ties to the smaller label.
        for (int i = 0; i < problem.node_count; ++i) {
            int best = 0;
            for (int l = 1; l < problem.label_count; ++l)
                if (problem.data_cost[i][l] < problem.data_cost[i][best]) best = l;
            if (best != result.labels[i]) ++result.moves;
            result.labels[i] = best;
        }
        result.energy = labeling_energy(problem, result.labels);
        return result;
    }
    bool improved = true;
    while (improved) {
        improved = false;
        for (int alpha = 0; alpha < problem.label_count; ++alpha) {
            std::vector<int> moved = expansion_move(problem, result.labels, alpha);
            double e = labeling_energy(problem, moved);
            if (e < result.energy - 1e-12) {
                result.labels = std::move(moved);
                result.energy = e;
                ++result.moves;
                improved = true;
            }
        }
    }
    return result;
}

}  // namespace lod2
