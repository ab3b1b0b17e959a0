#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "msoc/oracle.hpp"

using namespace msoc;
using namespace msoc::testing;

namespace {

TinyInstance zero_cost_instance() {
    TinyInstance inst = make_random_tiny(1, {});
    inst.problem.stage_cost = [](int, double, double, double) { return 0.0; };
    inst.problem.terminal_cost = [](double) { return 0.0; };
    return inst;
}

} // namespace

TEST_CASE("unconstrained oracle on zero costs") {
    TinyInstance inst = zero_cost_instance();
    ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
    auto sol = oracle_solve_unconstrained(inst.problem, inst.u_values(), inst.x0, 0, tree);
    CHECK(sol.value.raw() == doctest::Approx(0.0));
}

TEST_CASE("unconstrained oracle on a deterministic chain") {
    // Single-atom stages: the tree is one branch and the oracle is plain
    // shortest-path over control choices.
    ProblemDefinition problem;
    problem.horizon = TimeHorizon(0, 2);
    problem.dynamics = [](int, double x, double u, double) { return x + u; };
    problem.stage_cost = [](int, double x, double u, double) { return u * u - x; };
    problem.terminal_cost = [](double x) { return -x; };
    problem.constraint = [](double) { return std::vector<double>{0.0}; };
    problem.constraint_dim = 1;
    NoiseModel noise({make_noise_stage({0.0}, {1.0}), make_noise_stage({0.0}, {1.0})});
    ScenarioTree tree = enumerate_tree(noise, 0, 2);

    // Controls {0, 1}; exhaustive over the four plans.
    double best = 1e18;
    for (double u0 : {0.0, 1.0})
        for (double u1 : {0.0, 1.0}) {
            double x1 = 0.0 + u0, x2 = x1 + u1;
            double c = (u0 * u0 - 0.0) + (u1 * u1 - x1) - x2;
            best = std::min(best, c);
        }
    auto sol = oracle_solve_unconstrained(problem, {0.0, 1.0}, 0.0, 0, tree);
    CHECK(sol.value.raw() == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("constrained oracle reduces to unconstrained for slack bounds") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        TinyInstance inst = make_random_tiny(seed, {});
        ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
        auto unc = oracle_solve_unconstrained(inst.problem, inst.u_values(), inst.x0, 0, tree);
        auto con = oracle_solve_expectation_constrained(inst.problem, inst.u_values(),
                                                        inst.x0, 0, {1e9}, tree);
        CHECK(con.value.raw() == doctest::Approx(unc.value.raw()).epsilon(1e-12));
    }
}

TEST_CASE("constrained oracle signals infeasible bounds") {
    TinyInstance inst = make_random_tiny(6, {});
    ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
    CHECK_THROWS_AS(oracle_solve_expectation_constrained(inst.problem, inst.u_values(),
                                                         inst.x0, 0, {-1.0}, tree),
                    Error);
}

TEST_CASE("constrained oracle matches the flat enumeration") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        TinyInstance inst = make_random_tiny(seed, {});
        ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
        auto maps = enumerate_adapted_maps(inst.problem, inst.u_values(), inst.x0, tree);

        double b_min = 1e18;
        for (const auto& m : maps) b_min = std::min(b_min, m.expected_g[0]);
        double b = b_min + 0.25;

        double expected = 1e18;
        for (const auto& m : maps)
            if (m.expected_g[0] <= b + 1e-9) expected = std::min(expected, m.cost);
        auto sol = oracle_solve_expectation_constrained(inst.problem, inst.u_values(),
                                                        inst.x0, 0, {b}, tree);
        CHECK(sol.value.raw() == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("martingale construction on a deterministic tree") {
    NoiseModel noise({make_noise_stage({0.0}, {1.0}), make_noise_stage({0.0}, {1.0})});
    ScenarioTree tree = enumerate_tree(noise, 0, 2);
    auto built = construct_martingale_controls(tree, {{0.7}}, {0.3});
    for (int node = 1; node < tree.node_count(); ++node)
        CHECK(built.v_of_node[node][0] == doctest::Approx(0.0));
    CHECK(built.z_of_node[tree.leaves()[0]][0] == doctest::Approx(0.3));
}

TEST_CASE("martingale construction, one stage with two atoms") {
    NoiseModel noise({make_noise_stage({0.0, 1.0}, {0.5, 0.5})});
    ScenarioTree tree = enumerate_tree(noise, 0, 1);
    double z0 = -0.25;
    auto built = construct_martingale_controls(tree, {{0.0}, {1.0}}, {z0});
    auto leaves = tree.leaves();
    CHECK(built.v_of_node[leaves[0]][0] == doctest::Approx(-0.5));
    CHECK(built.v_of_node[leaves[1]][0] == doctest::Approx(0.5));
    CHECK(built.z_of_node[leaves[0]][0] == doctest::Approx(z0 - 0.5));
    CHECK(built.z_of_node[leaves[1]][0] == doctest::Approx(z0 + 0.5));
}

TEST_CASE("martingale construction invariants on random trees") {
    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
        TinyOptions opt;
        opt.horizon = 2 + static_cast<int>(seed % 2);
        TinyInstance inst = make_random_tiny(seed, opt);
        ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
        auto unc = oracle_solve_unconstrained(inst.problem, inst.u_values(), inst.x0, 0, tree);

        auto leaves = tree.leaves();
        std::vector<ConstraintVec> leaf_g(leaves.size());
        double eg = 0.0;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            leaf_g[i] = inst.problem.g(unc.x_of_node[leaves[i]]);
            eg += tree.node(leaves[i]).prob * leaf_g[i][0];
        }
        double z0 = 0.4;
        auto built = construct_martingale_controls(tree, leaf_g, {z0});

        // Node-wise zero conditional mean.
        for (int node = 0; node < tree.node_count(); ++node) {
            if (tree.is_leaf(node)) continue;
            double mean = 0.0;
            for (int j = 0; j < tree.node(node).child_count; ++j) {
                int c = tree.child(node, j);
                mean += tree.node(c).atom_prob * built.v_of_node[c][0];
            }
            CHECK(std::abs(mean) <= 1e-12);
        }
        // Telescoping: g(x_T) - z_T = E[g] - z0 at every leaf.
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            double lhs = leaf_g[i][0] - built.z_of_node[leaves[i]][0];
            CHECK(std::abs(lhs - (eg - z0)) <= 1e-12);
        }
    }
}

TEST_CASE("extended oracle trivial cases") {
    TinyInstance inst = make_random_tiny(31, {});
    inst.problem.constraint = [](double) { return std::vector<double>{0.0}; };
    ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
    auto unc = oracle_solve_unconstrained(inst.problem, inst.u_values(), inst.x0, 0, tree);
    auto ext = oracle_solve_extended(inst.problem, inst.u_values(), inst.x0, {0.0}, 0, tree,
                                     {{0.0}});
    CHECK(ext.value.raw() == doctest::Approx(unc.value.raw()).epsilon(1e-12));
    for (int node = 1; node < tree.node_count(); ++node)
        if (!ext.v_of_node[node].empty())
            CHECK(ext.v_of_node[node][0] == doctest::Approx(0.0));
}

TEST_CASE("equivalence of the augmented and constrained formulations on trees") {
    // With z0 = b and candidate v built from the constrained optimum, the two
    // oracle values coincide exactly.
    for (std::uint64_t seed : {41u, 42u, 43u, 44u, 45u, 46u}) {
        TinyOptions opt;
        opt.horizon = 2;
        opt.atoms = 2 + static_cast<int>(seed % 2);
        TinyInstance inst = make_random_tiny(seed, opt);
        ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);

        auto maps = enumerate_adapted_maps(inst.problem, inst.u_values(), inst.x0, tree);
        double b_min = 1e18, b_unc = -1e18;
        double best_cost = 1e18;
        for (const auto& m : maps) {
            b_min = std::min(b_min, m.expected_g[0]);
            if (m.cost < best_cost) {
                best_cost = m.cost;
                b_unc = m.expected_g[0];
            }
        }
        double b = 0.5 * (b_min + b_unc);

        OracleSolution con;
        try {
            con = oracle_solve_expectation_constrained(inst.problem, inst.u_values(),
                                                       inst.x0, 0, {b}, tree);
        } catch (const Error&) {
            continue; // infeasible draw; nothing to compare
        }

        auto leaves = tree.leaves();
        std::vector<ConstraintVec> leaf_g(leaves.size());
        for (std::size_t i = 0; i < leaves.size(); ++i)
            leaf_g[i] = inst.problem.g(con.x_of_node[leaves[i]]);
        auto candidates = default_v_candidates(tree, leaf_g, {b});

        auto ext = oracle_solve_extended(inst.problem, inst.u_values(), inst.x0, {b}, 0,
                                         tree, candidates);
        CHECK(ext.value.raw() == doctest::Approx(con.value.raw()).epsilon(1e-9));

        // Sandwich: unconstrained <= constrained-equivalent values.
        auto unc = oracle_solve_unconstrained(inst.problem, inst.u_values(), inst.x0, 0, tree);
        CHECK(unc.value.raw() <= ext.value.raw() + 1e-12);
    }
}

TEST_CASE("oracle budgets trip") {
    TinyOptions opt;
    opt.horizon = 3;
    opt.nx = 4;
    opt.nu = 3;
    opt.atoms = 3;
    TinyInstance inst = make_random_tiny(51, opt);
    ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
    CHECK_THROWS_AS(oracle_solve_expectation_constrained(inst.problem, inst.u_values(),
                                                         inst.x0, 0, {1e9}, tree, 100),
                    Error);
}
