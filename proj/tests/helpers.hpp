#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "msoc/noise.hpp"
#include "msoc/oracle.hpp"
#include "msoc/problem.hpp"
#include "msoc/rng.hpp"
#include "msoc/scenario_tree.hpp"

namespace msoc::testing {

/// Toy instance with tabled integer-state dynamics, so every reachable state
/// sits exactly on the grid and tree oracles apply.
struct TinyInstance {
    ProblemDefinition problem;
    ScalarGrid x_grid;
    ScalarGrid u_grid;
    NoiseModel noise;
    double x0 = 0.0;
    int nx = 0, nu = 0, atoms = 0, horizon = 0;
    std::uint64_t prob_denominator = 1; // per-stage weight denominator

    std::vector<double> u_values() const {
        std::vector<double> out(nu);
        for (int i = 0; i < nu; ++i) out[i] = u_grid.point(i);
        return out;
    }
};

struct TinyOptions {
    int horizon = 2;
    int nx = 3;
    int nu = 2;
    int atoms = 2;
    bool uniform_probs = true; // else weights {1,3}/4 (atoms must be 2)
    int g_span = 1;            // g values drawn from {0..g_span}
};

inline TinyInstance make_random_tiny(std::uint64_t seed, const TinyOptions& opt = {}) {
    SplitMix64 rng(seed);
    TinyInstance inst;
    inst.nx = opt.nx;
    inst.nu = opt.nu;
    inst.atoms = opt.atoms;
    inst.horizon = opt.horizon;
    inst.x_grid = ScalarGrid(0.0, 1.0, opt.nx);
    inst.u_grid = ScalarGrid(0.0, 1.0, opt.nu);

    auto dyn = std::make_shared<std::vector<int>>();
    auto cost = std::make_shared<std::vector<double>>();
    dyn->resize(static_cast<std::size_t>(opt.horizon) * opt.nx * opt.nu * opt.atoms);
    cost->resize(dyn->size());
    for (auto& d : *dyn) d = static_cast<int>(rng.next() % opt.nx);
    for (auto& c : *cost) c = 0.25 * static_cast<double>(rng.next() % 41);

    auto g_table = std::make_shared<std::vector<double>>(opt.nx);
    for (auto& g : *g_table)
        g = static_cast<double>(rng.next() % static_cast<std::uint64_t>(opt.g_span + 1));

    const int nx = opt.nx, nu = opt.nu, atoms = opt.atoms;
    auto idx = [nx, nu, atoms](int t, int xi, int ui, int wi) {
        return ((static_cast<std::size_t>(t) * nx + xi) * nu + ui) * atoms + wi;
    };

    inst.problem.horizon = TimeHorizon(0, opt.horizon);
    inst.problem.dynamics = [dyn, idx](int t, double x, double u, double w) {
        return static_cast<double>(
            (*dyn)[idx(t, static_cast<int>(std::lround(x)), static_cast<int>(std::lround(u)),
                       static_cast<int>(std::lround(w)))]);
    };
    inst.problem.stage_cost = [cost, idx](int t, double x, double u, double w) {
        return (*cost)[idx(t, static_cast<int>(std::lround(x)),
                           static_cast<int>(std::lround(u)),
                           static_cast<int>(std::lround(w)))];
    };
    inst.problem.terminal_cost = [](double) { return 0.0; };
    inst.problem.constraint = [g_table](double x) {
        return std::vector<double>{(*g_table)[static_cast<int>(std::lround(x))]};
    };
    inst.problem.constraint_dim = 1;

    std::vector<double> values(opt.atoms), probs(opt.atoms);
    for (int j = 0; j < opt.atoms; ++j) values[j] = j;
    if (opt.uniform_probs) {
        for (auto& p : probs) p = 1.0 / opt.atoms;
        inst.prob_denominator = opt.atoms;
    } else {
        probs = {0.25, 0.75};
        inst.prob_denominator = 4;
    }
    std::vector<NoiseStage> stages(opt.horizon, make_noise_stage(values, probs));
    inst.noise = NoiseModel(std::move(stages));

    inst.x0 = static_cast<double>(rng.next() % opt.nx);
    return inst;
}

/// Every adapted control map of a tiny tree with its cost and E[g(x_T)]:
/// the flat ground truth for duality and feasibility tests.
struct MapStats {
    double cost = 0.0;
    std::vector<double> expected_g;
};

inline std::vector<MapStats> enumerate_adapted_maps(const ProblemDefinition& problem,
                                                    const std::vector<double>& u_values,
                                                    double x0, const ScenarioTree& tree) {
    std::vector<int> internal;
    for (int i = 0; i < tree.node_count(); ++i)
        if (!tree.is_leaf(i)) internal.push_back(i);

    std::vector<MapStats> all;
    std::vector<int> assign(internal.size(), 0);
    std::vector<double> x(tree.node_count(), 0.0);
    while (true) {
        x[tree.root()] = x0;
        MapStats stats;
        stats.expected_g.assign(problem.constraint_dim, 0.0);
        for (int node = 0; node < tree.node_count(); ++node) {
            const TreeNode& n = tree.node(node);
            if (tree.is_leaf(node)) {
                stats.cost += n.prob * problem.terminal_cost(x[node]);
                auto g = problem.g(x[node]);
                for (std::size_t i = 0; i < g.size(); ++i)
                    stats.expected_g[i] += n.prob * g[i];
                continue;
            }
            int slot = static_cast<int>(std::lower_bound(internal.begin(), internal.end(),
                                                         node) -
                                        internal.begin());
            double u = u_values[assign[slot]];
            for (int j = 0; j < n.child_count; ++j) {
                int c = tree.child(node, j);
                double w = tree.node(c).noise_value;
                x[c] = problem.dynamics(n.stage, x[node], u, w);
                stats.cost += tree.node(c).prob * problem.stage_cost(n.stage, x[node], u, w);
            }
        }
        all.push_back(std::move(stats));

        std::size_t k = 0;
        while (k < assign.size()) {
            if (++assign[k] < static_cast<int>(u_values.size())) break;
            assign[k] = 0;
            ++k;
        }
        if (k == assign.size()) break;
    }
    return all;
}

} // namespace msoc::testing
