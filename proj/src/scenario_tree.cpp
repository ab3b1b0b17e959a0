#include "msoc/scenario_tree.hpp"

#include <limits>
#include <string>

#include "msoc/errors.hpp"

namespace msoc {

ScenarioTree enumerate_tree(const NoiseModel& model, int t0, int T,
                            std::uint64_t leaf_budget) {
    if (t0 < 0 || t0 >= T || T > model.stage_count())
        fail(ErrorCode::InvalidArgument, "tree horizon inconsistent with noise model");

    constexpr std::uint64_t kSaturate = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t leaf_count = 1;
    for (int t = t0; t < T; ++t) {
        auto atoms = static_cast<std::uint64_t>(model.stage(t).size());
        leaf_count = (leaf_count > kSaturate / atoms) ? kSaturate : leaf_count * atoms;
    }
    if (leaf_count > leaf_budget)
        fail(ErrorCode::BudgetExceeded,
             "scenario tree would have " + std::to_string(leaf_count) +
                 " leaves, budget is " + std::to_string(leaf_budget));

    std::vector<TreeNode> nodes;
    nodes.push_back(TreeNode{t0, -1, -1, 0.0, 1.0, 1.0, -1, 0});

    int level_begin = 0;
    int level_end = 1;
    for (int t = t0; t < T; ++t) {
        const NoiseStage& stage = model.stage(t);
        for (int i = level_begin; i < level_end; ++i) {
            nodes[i].first_child = static_cast<int>(nodes.size());
            nodes[i].child_count = stage.size();
            for (int j = 0; j < stage.size(); ++j) {
                nodes.push_back(TreeNode{t + 1, i, j, stage.value(j), stage.prob(j),
                                         nodes[i].prob * stage.prob(j), -1, 0});
            }
        }
        level_begin = level_end;
        level_end = static_cast<int>(nodes.size());
    }
    return ScenarioTree(t0, T, std::move(nodes));
}

} // namespace msoc
