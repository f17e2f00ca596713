#pragma once

#include <vector>

#include "lod2/errors.hpp"

namespace lod2 {

// Multi-label Potts problem: sum of per-node data costs plus lambda-weighted
// pairwise penalties charged whenever two neighbours take different labels.
struct LabelingProblem {
    struct Edge {
        int i, j;
        double weight;  // >= 0
    };

    int node_count = 0;
    int label_count = 0;
    std::vector<std::vector<double>> data_cost;  // node_count x label_count
    std::vector<Edge> edges;
    double lambda = 1.0;
    std::vector<int> initial_labels;

    void validate() const;
};

struct LabelingResult {
    std::vector<int> labels;
    double energy = 0.0;
    int moves = 0;
};

double labeling_energy(const LabelingProblem& problem, const std::vector<int>& labels);

// Alpha-expansion over max-flow. Sweeps labels in index order until a full
// sweep yields no energy decrease. Deterministic; ties keep the smaller label.
LabelingResult solve_labeling(const LabelingProblem& problem);

}  // namespace lod2
