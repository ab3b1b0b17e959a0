#pragma once

#include <cstdint>
#include <vector>

#include "msoc/noise.hpp"

namespace msoc {

/// One node of an enumerated noise tree. The root sits at stage t0 with
/// probability one; a node at stage t carries the noise value revealed on the
/// transition t-1 -> t and the product probability of its path.
struct TreeNode {
    int stage = 0;
    int parent = -1;
    int atom = -1;          // atom index within the parent's stage distribution
    double noise_value = 0; // undefined at the root
    double atom_prob = 1.0; // conditional probability given the parent
    double prob = 1.0;      // absolute path probability
    int first_child = -1;
    int child_count = 0;
};

class ScenarioTree {
public:
    ScenarioTree(int t0, int T, std::vector<TreeNode> nodes)
        : t0_(t0), T_(T), nodes_(std::move(nodes)) {}

    int t0() const { return t0_; }
    int final_stage() const { return T_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int i) const { return nodes_[i]; }
    int root() const { return 0; }

    bool is_leaf(int i) const { return nodes_[i].child_count == 0; }
    int child(int i, int j) const { return nodes_[i].first_child + j; }

    std::vector<int> leaves() const {
        std::vector<int> out;
        for (int i = 0; i < node_count(); ++i)
            if (is_leaf(i)) out.push_back(i);
        return out;
    }

private:
    int t0_;
    int T_;
    std::vector<TreeNode> nodes_;
};

/// Full enumeration of the noise process over stages t0..T. The leaf count
/// (product of atom counts) must stay within `leaf_budget`, otherwise
/// BudgetExceeded is raised carrying the computed count.
ScenarioTree enumerate_tree(const NoiseModel& model, int t0, int T,
                            std::uint64_t leaf_budget = 1000000);

} // namespace msoc
