#include "msoc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msoc/errors.hpp"

namespace msoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;

struct Budget {
    std::uint64_t left;
    void spend(std::uint64_t amount = 1) {
        if (amount > left)
            fail(ErrorCode::BudgetExceeded, "oracle enumeration budget exhausted");
        left -= amount;
    }
};

bool leq_componentwise(const ConstraintVec& a, const ConstraintVec& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i] + tol) return false;
    return true;
}

// Backward value of the unconstrained problem from `node` with state x.
double unconstrained_value(const ProblemDefinition& problem,
                           const std::vector<double>& u_values, const ScenarioTree& tree,
                           int node, double x, Budget& budget) {
    budget.spend();
    const TreeNode& n = tree.node(node);
    if (tree.is_leaf(node)) return problem.terminal_cost(x);

    double best = kInf;
    for (double u : u_values) {
        double acc = 0.0;
        for (int j = 0; j < n.child_count; ++j) {
            int c = tree.child(node, j);
            double w = tree.node(c).noise_value;
            double xn = problem.dynamics(n.stage, x, u, w);
            acc += tree.node(c).atom_prob *
                   (problem.stage_cost(n.stage, x, u, w) +
                    unconstrained_value(problem, u_values, tree, c, xn, budget));
            if (!std::isfinite(acc)) {
                acc = kInf;
                break;
            }
        }
        best = std::min(best, acc);
    }
    return best;
}

} // namespace

OracleSolution oracle_solve_unconstrained(const ProblemDefinition& problem,
                                          const std::vector<double>& u_values,
                                          double x0, int t0, const ScenarioTree& tree,
                                          std::uint64_t budget) {
    if (tree.t0() != t0)
        fail(ErrorCode::InvalidArgument, "tree root stage does not match t0");
    Budget counter{budget};

    OracleSolution sol;
    sol.u_of_node.assign(tree.node_count(), -1);
    sol.x_of_node.assign(tree.node_count(), 0.0);

    // Descend, re-deriving the argmin control at each visited node.
    sol.x_of_node[tree.root()] = x0;
    for (int node = 0; node < tree.node_count(); ++node) {
        if (tree.is_leaf(node)) continue;
        const TreeNode& n = tree.node(node);
        double x = sol.x_of_node[node];
        double best = kInf;
        int best_idx = 0;
        for (std::size_t ui = 0; ui < u_values.size(); ++ui) {
            double u = u_values[ui];
            double acc = 0.0;
            for (int j = 0; j < n.child_count; ++j) {
                int c = tree.child(node, j);
                double w = tree.node(c).noise_value;
                double xn = problem.dynamics(n.stage, x, u, w);
                acc += tree.node(c).atom_prob *
                       (problem.stage_cost(n.stage, x, u, w) +
                        unconstrained_value(problem, u_values, tree, c, xn, counter));
                if (!std::isfinite(acc)) {
                    acc = kInf;
                    break;
                }
            }
            if (acc < best) {
                best = acc;
                best_idx = static_cast<int>(ui);
            }
        }
        sol.u_of_node[node] = best_idx;
        if (node == tree.root()) sol.value = ExtendedReal(best);
        for (int j = 0; j < n.child_count; ++j) {
            int c = tree.child(node, j);
            sol.x_of_node[c] =
                problem.dynamics(n.stage, x, u_values[best_idx], tree.node(c).noise_value);
        }
    }
    return sol;
}

OracleSolution oracle_solve_expectation_constrained(
    const ProblemDefinition& problem, const std::vector<double>& u_values, double x0,
    int t0, const ConstraintVec& b, const ScenarioTree& tree, std::uint64_t budget) {
    if (tree.t0() != t0)
        fail(ErrorCode::InvalidArgument, "tree root stage does not match t0");
    if (static_cast<int>(b.size()) != problem.constraint_dim)
        fail(ErrorCode::InvalidArgument, "constraint level has wrong dimension");

    std::vector<int> internal;
    for (int i = 0; i < tree.node_count(); ++i)
        if (!tree.is_leaf(i)) internal.push_back(i);

    double maps = std::pow(static_cast<double>(u_values.size()),
                           static_cast<double>(internal.size()));
    if (maps > static_cast<double>(budget))
        fail(ErrorCode::BudgetExceeded,
             "control map enumeration needs " + std::to_string(maps) + " candidates");

    std::vector<int> assign(internal.size(), 0);
    std::vector<double> x(tree.node_count(), 0.0);
    std::vector<int> u_at_node(tree.node_count(), -1);

    double best = kInf;
    bool found = false;
    OracleSolution sol;
    sol.u_of_node.assign(tree.node_count(), -1);
    sol.x_of_node.assign(tree.node_count(), 0.0);

    while (true) {
        for (std::size_t k = 0; k < internal.size(); ++k)
            u_at_node[internal[k]] = assign[k];

        // Forward roll: states, expected cost, terminal constraint expectation.
        x[tree.root()] = x0;
        double cost = 0.0;
        ConstraintVec eg(b.size(), 0.0);
        for (int node = 0; node < tree.node_count(); ++node) {
            const TreeNode& n = tree.node(node);
            if (tree.is_leaf(node)) {
                cost += n.prob * problem.terminal_cost(x[node]);
                auto g = problem.g(x[node]);
                for (std::size_t i = 0; i < eg.size(); ++i) eg[i] += n.prob * g[i];
                continue;
            }
            double u = u_values[u_at_node[node]];
            for (int j = 0; j < n.child_count; ++j) {
                int c = tree.child(node, j);
                double w = tree.node(c).noise_value;
                x[c] = problem.dynamics(n.stage, x[node], u, w);
                cost += tree.node(c).prob * problem.stage_cost(n.stage, x[node], u, w);
            }
        }

        if (leq_componentwise(eg, b, kFeasTol) && cost < best) {
            best = cost;
            found = true;
            sol.u_of_node.assign(tree.node_count(), -1);
            for (int node : internal) sol.u_of_node[node] = u_at_node[node];
            sol.x_of_node = x;
        }

        // Odometer over the adapted control map.
        std::size_t k = 0;
        while (k < assign.size()) {
            if (++assign[k] < static_cast<int>(u_values.size())) break;
            assign[k] = 0;
            ++k;
        }
        if (k == assign.size()) break;
    }

    if (!found)
        fail(ErrorCode::Infeasible, "no adapted control map meets the expectation bound");
    sol.value = ExtendedReal(best);
    return sol;
}

namespace {

struct ExtendedContext {
    const ProblemDefinition& problem;
    const std::vector<double>& u_values;
    const ScenarioTree& tree;
    const std::vector<ConstraintVec>& candidates;
    double v_scale;
    Budget budget;
};

struct NodeChoice {
    double value = kInf;
    int u_idx = -1;
    std::vector<int> profile; // candidate index per child
};

double extended_value(ExtendedContext& ctx, int node, double x, const ConstraintVec& z);

// Enumerates candidate assignments per child with conditional mean ~ 0.
// DFS in lexicographic candidate order so the first strict minimum is also
// the lexicographically smallest optimal profile.
void enumerate_profiles(ExtendedContext& ctx, int node, double x, const ConstraintVec& z,
                        double u, std::size_t child_slot, std::vector<int>& profile,
                        std::vector<ConstraintVec>& sums, NodeChoice& best, int u_idx) {
    const TreeNode& n = ctx.tree.node(node);
    std::size_t m = z.size();
    if (child_slot == static_cast<std::size_t>(n.child_count)) {
        const ConstraintVec& total = sums[child_slot];
        for (std::size_t i = 0; i < m; ++i)
            if (std::abs(total[i]) > 1e-12 * std::max(1.0, ctx.v_scale)) return;

        double acc = 0.0;
        for (int j = 0; j < n.child_count; ++j) {
            int c = ctx.tree.child(node, j);
            double w = ctx.tree.node(c).noise_value;
            double xn = ctx.problem.dynamics(n.stage, x, u, w);
            ConstraintVec zn(m);
            for (std::size_t i = 0; i < m; ++i)
                zn[i] = z[i] + ctx.candidates[profile[j]][i];
            acc += ctx.tree.node(c).atom_prob *
                   (ctx.problem.stage_cost(n.stage, x, u, w) +
                    extended_value(ctx, c, xn, zn));
            if (!std::isfinite(acc)) return;
        }
        if (acc < best.value) {
            best.value = acc;
            best.u_idx = u_idx;
            best.profile = profile;
        }
        return;
    }

    for (std::size_t ci = 0; ci < ctx.candidates.size(); ++ci) {
        profile[child_slot] = static_cast<int>(ci);
        int c = ctx.tree.child(node, static_cast<int>(child_slot));
        for (std::size_t i = 0; i < m; ++i)
            sums[child_slot + 1][i] =
                sums[child_slot][i] + ctx.tree.node(c).atom_prob * ctx.candidates[ci][i];
        enumerate_profiles(ctx, node, x, z, u, child_slot + 1, profile, sums, best, u_idx);
    }
}

NodeChoice best_node_choice(ExtendedContext& ctx, int node, double x,
                            const ConstraintVec& z) {
    const TreeNode& n = ctx.tree.node(node);
    NodeChoice best;
    std::vector<int> profile(n.child_count, 0);
    std::vector<ConstraintVec> sums(n.child_count + 1, ConstraintVec(z.size(), 0.0));
    for (std::size_t ui = 0; ui < ctx.u_values.size(); ++ui) {
        NodeChoice per_u;
        enumerate_profiles(ctx, node, x, z, ctx.u_values[ui], 0, profile, sums, per_u,
                           static_cast<int>(ui));
        if (per_u.value < best.value) best = per_u;
    }
    return best;
}

double extended_value(ExtendedContext& ctx, int node, double x, const ConstraintVec& z) {
    ctx.budget.spend();
    if (ctx.tree.is_leaf(node)) {
        auto g = ctx.problem.g(x);
        if (!leq_componentwise(g, z, kFeasTol)) return kInf;
        return ctx.problem.terminal_cost(x);
    }
    return best_node_choice(ctx, node, x, z).value;
}

} // namespace

OracleExtendedSolution oracle_solve_extended(const ProblemDefinition& problem,
                                             const std::vector<double>& u_values,
                                             double x0, const ConstraintVec& z0, int t0,
                                             const ScenarioTree& tree,
                                             const std::vector<ConstraintVec>& v_candidates,
                                             std::uint64_t budget) {
    if (tree.t0() != t0)
        fail(ErrorCode::InvalidArgument, "tree root stage does not match t0");
    if (v_candidates.empty())
        fail(ErrorCode::InvalidArgument, "need at least one v candidate");

    double v_scale = 1.0;
    for (const auto& c : v_candidates)
        for (double vi : c) v_scale = std::max(v_scale, std::abs(vi));

    ExtendedContext ctx{problem, u_values, tree, v_candidates, v_scale, Budget{budget}};

    OracleExtendedSolution sol;
    sol.u_of_node.assign(tree.node_count(), -1);
    sol.x_of_node.assign(tree.node_count(), 0.0);
    sol.v_of_node.assign(tree.node_count(), {});
    sol.z_of_node.assign(tree.node_count(), {});

    sol.x_of_node[tree.root()] = x0;
    sol.z_of_node[tree.root()] = z0;

    std::vector<char> reachable(tree.node_count(), 0);
    reachable[tree.root()] = 1;
    for (int node = 0; node < tree.node_count(); ++node) {
        if (tree.is_leaf(node) || !reachable[node]) continue;
        const TreeNode& n = tree.node(node);
        double x = sol.x_of_node[node];
        const ConstraintVec& z = sol.z_of_node[node];
        NodeChoice choice = best_node_choice(ctx, node, x, z);
        if (node == tree.root()) {
            if (!std::isfinite(choice.value))
                fail(ErrorCode::Infeasible,
                     "no adapted (u,v) assignment satisfies the final constraint");
            sol.value = ExtendedReal(choice.value);
        }
        if (choice.u_idx < 0) continue; // infinite subtree; descent stops here
        sol.u_of_node[node] = choice.u_idx;
        for (int j = 0; j < n.child_count; ++j) {
            int c = tree.child(node, j);
            double w = tree.node(c).noise_value;
            reachable[c] = 1;
            sol.x_of_node[c] = problem.dynamics(n.stage, x, u_values[choice.u_idx], w);
            sol.v_of_node[c] = v_candidates[choice.profile[j]];
            ConstraintVec zn(z.size());
            for (std::size_t i = 0; i < z.size(); ++i)
                zn[i] = z[i] + sol.v_of_node[c][i];
            sol.z_of_node[c] = zn;
        }
    }
    return sol;
}

MartingaleConstruction construct_martingale_controls(const ScenarioTree& tree,
                                                     const std::vector<ConstraintVec>& leaf_g,
                                                     const ConstraintVec& z0) {
    std::size_t m = z0.size();
    MartingaleConstruction out;
    out.cond_exp.assign(tree.node_count(), ConstraintVec(m, 0.0));
    out.v_of_node.assign(tree.node_count(), {});
    out.z_of_node.assign(tree.node_count(), {});

    // Leaves carry g(x_T); internal nodes average their children. Children
    // always follow their parent in index order, so one backward sweep works.
    std::size_t leaf_seen = 0;
    std::vector<int> leaves = tree.leaves();
    if (leaves.size() != leaf_g.size())
        fail(ErrorCode::InvalidArgument, "one g value per leaf required");
    for (int node : leaves) out.cond_exp[node] = leaf_g[leaf_seen++];

    for (int node = tree.node_count() - 1; node >= 0; --node) {
        if (tree.is_leaf(node)) continue;
        ConstraintVec acc(m, 0.0);
        for (int j = 0; j < tree.node(node).child_count; ++j) {
            int c = tree.child(node, j);
            for (std::size_t i = 0; i < m; ++i)
                acc[i] += tree.node(c).atom_prob * out.cond_exp[c][i];
        }
        out.cond_exp[node] = acc;
    }

    out.z_of_node[tree.root()] = z0;
    for (int node = 1; node < tree.node_count(); ++node) {
        int p = tree.node(node).parent;
        ConstraintVec v(m), z(m);
        for (std::size_t i = 0; i < m; ++i) {
            v[i] = out.cond_exp[node][i] - out.cond_exp[p][i];
            z[i] = out.z_of_node[p][i] + v[i];
        }
        out.v_of_node[node] = std::move(v);
        out.z_of_node[node] = std::move(z);
    }
    return out;
}

std::vector<ConstraintVec> default_v_candidates(const ScenarioTree& tree,
                                                const std::vector<ConstraintVec>& leaf_g,
                                                const ConstraintVec& z0,
                                                int extra_grid_points,
                                                double extra_grid_step) {
    auto built = construct_martingale_controls(tree, leaf_g, z0);
    std::size_t m = z0.size();

    std::vector<ConstraintVec> candidates;
    candidates.push_back(ConstraintVec(m, 0.0));
    for (int node = 1; node < tree.node_count(); ++node)
        candidates.push_back(built.v_of_node[node]);
    for (int k = 1; k <= extra_grid_points; ++k) {
        candidates.push_back(ConstraintVec(m, k * extra_grid_step));
        candidates.push_back(ConstraintVec(m, -k * extra_grid_step));
    }

    std::sort(candidates.begin(), candidates.end());
    auto close = [](const ConstraintVec& a, const ConstraintVec& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > 1e-12) return false;
        return true;
    };
    candidates.erase(std::unique(candidates.begin(), candidates.end(), close),
                     candidates.end());
    return candidates;
}

} // namespace msoc
