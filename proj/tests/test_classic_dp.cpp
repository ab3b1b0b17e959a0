#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "msoc/classic_dp.hpp"
#include "msoc/oracle.hpp"

using namespace msoc;
using namespace msoc::testing;

namespace {

/// x, u in {0,1}; x' = (x+u+w) mod 2; L = u; K = x; w uniform on {0,1}.
struct Mod2Instance {
    ProblemDefinition problem;
    ScalarGrid x_grid{0.0, 1.0, 2};
    ScalarGrid u_grid{0.0, 1.0, 2};
    NoiseModel noise;
};

Mod2Instance make_mod2(int horizon) {
    Mod2Instance inst;
    inst.problem.horizon = TimeHorizon(0, horizon);
    inst.problem.dynamics = [](int, double x, double u, double w) {
        return std::fmod(x + u + w, 2.0);
    };
    inst.problem.stage_cost = [](int, double, double u, double) { return u; };
    inst.problem.terminal_cost = [](double x) { return x; };
    inst.problem.constraint = [](double) { return std::vector<double>{0.0}; };
    inst.problem.constraint_dim = 1;
    std::vector<NoiseStage> stages(horizon, make_noise_stage({0.0, 1.0}, {0.5, 0.5}));
    inst.noise = NoiseModel(std::move(stages));
    return inst;
}

TerminalValueFn wrap_terminal(const ProblemDefinition& problem) {
    return [&problem](double x) { return ExtendedReal(problem.terminal_cost(x)); };
}

} // namespace

TEST_CASE("zero costs give a zero table and the first control") {
    TinyInstance inst = make_random_tiny(2, {});
    inst.problem.stage_cost = [](int, double, double, double) { return 0.0; };
    inst.problem.terminal_cost = [](double) { return 0.0; };
    auto [table, policy] =
        solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise,
                      wrap_terminal(inst.problem));
    for (int t = 0; t <= inst.horizon; ++t)
        for (int xi = 0; xi < inst.nx; ++xi) CHECK(table.value(t, xi).raw() == 0.0);
    for (int t = 0; t < inst.horizon; ++t)
        for (int xi = 0; xi < inst.nx; ++xi) CHECK(policy.control_index(t, xi) == 0);
}

TEST_CASE("single noise atom reduces to deterministic one-step minimization") {
    ProblemDefinition problem;
    problem.horizon = TimeHorizon(0, 1);
    problem.dynamics = [](int, double x, double u, double) { return std::min(2.0, x + u); };
    problem.stage_cost = [](int, double, double u, double) { return 0.3 * u; };
    problem.terminal_cost = [](double x) { return -x; };
    problem.constraint = [](double) { return std::vector<double>{0.0}; };
    problem.constraint_dim = 1;
    NoiseModel noise({make_noise_stage({0.0}, {1.0})});
    ScalarGrid xg(0.0, 1.0, 3), ug(0.0, 1.0, 3);

    auto [table, policy] = solve_classic(problem, xg, ug, noise, wrap_terminal(problem));
    // At x = 0: min over u of 0.3u - min(2, u) -> u = 2 with value -1.4.
    CHECK(table.value(0, 0).raw() == doctest::Approx(-1.4));
    CHECK(policy.control_index(0, 0) == 2);
}

TEST_CASE("two-state hand instance") {
    Mod2Instance inst = make_mod2(2);
    auto [table, policy] = solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise,
                                         wrap_terminal(inst.problem));
    CHECK(table.value(1, 0).raw() == doctest::Approx(0.5));
    CHECK(table.value(1, 1).raw() == doctest::Approx(0.5));
    CHECK(policy.control_index(1, 0) == 0);
    CHECK(policy.control_index(1, 1) == 0);

    ScenarioTree tree = enumerate_tree(inst.noise, 0, 2);
    auto oracle = oracle_solve_unconstrained(inst.problem, {0.0, 1.0}, 0.0, 0, tree);
    CHECK(table.value(0, 0).raw() == doctest::Approx(oracle.value.raw()).epsilon(1e-9));
}

TEST_CASE("oracle equivalence on random tiny instances") {
    for (std::uint64_t seed = 60; seed < 66; ++seed) {
        TinyOptions opt;
        opt.horizon = 2 + static_cast<int>(seed % 2);
        opt.atoms = 2 + static_cast<int>(seed % 2);
        TinyInstance inst = make_random_tiny(seed, opt);
        auto [table, policy] = solve_classic(inst.problem, inst.x_grid, inst.u_grid,
                                             inst.noise, wrap_terminal(inst.problem));
        ScenarioTree tree = enumerate_tree(inst.noise, 0, inst.horizon);
        auto oracle =
            oracle_solve_unconstrained(inst.problem, inst.u_values(), inst.x0, 0, tree);
        int xi0 = inst.x_grid.snap(inst.x0);
        CHECK(table.value(0, xi0).raw() ==
              doctest::Approx(oracle.value.raw()).epsilon(1e-9));
    }
}

TEST_CASE("monotonicity in the terminal cost") {
    TinyInstance inst = make_random_tiny(70, {});
    auto low = [](double x) { return ExtendedReal(0.5 * x); };
    auto high = [](double x) { return ExtendedReal(0.5 * x + 1.5 + 0.25 * x * x); };
    auto [ta, pa] = solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise, low);
    auto [tb, pb] = solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise, high);
    for (int t = 0; t <= inst.horizon; ++t)
        for (int xi = 0; xi < inst.nx; ++xi)
            CHECK(ta.value(t, xi).raw() <= tb.value(t, xi).raw());
}

TEST_CASE("adding a constant to the terminal shifts values and keeps the argmins") {
    TinyInstance inst = make_random_tiny(71, {});
    const double c = 17.25;
    auto base = [](double x) { return ExtendedReal(0.75 * x); };
    auto shifted = [c](double x) { return ExtendedReal(0.75 * x + c); };
    auto [ta, pa] = solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise, base);
    auto [tb, pb] =
        solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise, shifted);
    for (int t = 0; t <= inst.horizon; ++t)
        for (int xi = 0; xi < inst.nx; ++xi)
            CHECK(tb.value(t, xi).raw() - ta.value(t, xi).raw() ==
                  doctest::Approx(c).epsilon(1e-12));
    for (int t = 0; t < inst.horizon; ++t)
        for (int xi = 0; xi < inst.nx; ++xi)
            CHECK(pa.control_index(t, xi) == pb.control_index(t, xi));
}

TEST_CASE("solving the truncated horizon reproduces the table tail") {
    TinyOptions opt;
    opt.horizon = 3;
    TinyInstance inst = make_random_tiny(72, opt);
    auto [full, fp] = solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise,
                                    wrap_terminal(inst.problem));
    for (int t = 1; t < inst.horizon; ++t) {
        ProblemDefinition tail = inst.problem;
        tail.horizon = TimeHorizon(t, inst.horizon);
        auto [part, pp] = solve_classic(tail, inst.x_grid, inst.u_grid, inst.noise,
                                        wrap_terminal(inst.problem));
        for (int s = t; s <= inst.horizon; ++s)
            for (int xi = 0; xi < inst.nx; ++xi)
                CHECK(std::abs(part.value(s, xi).raw() - full.value(s, xi).raw()) <= 1e-12);
    }
}

TEST_CASE("infinite terminal values propagate through the expectation") {
    Mod2Instance inst = make_mod2(1);
    auto terminal = [](double x) {
        return x > 0.5 ? ExtendedReal::infinity() : ExtendedReal(0.0);
    };
    auto [table, policy] =
        solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise, terminal);
    // Both noise atoms are live, so every control mixes parities and every
    // stage-0 value is infinite.
    CHECK(table.value(0, 0).is_infinite());
    CHECK(table.value(0, 1).is_infinite());
}

TEST_CASE("linear value read interpolates the continuation") {
    ProblemDefinition problem;
    problem.horizon = TimeHorizon(0, 1);
    problem.dynamics = [](int, double x, double, double) { return x + 0.5; };
    problem.stage_cost = [](int, double, double, double) { return 0.0; };
    problem.terminal_cost = [](double x) { return x * x; };
    problem.constraint = [](double) { return std::vector<double>{0.0}; };
    problem.constraint_dim = 1;
    NoiseModel noise({make_noise_stage({0.0}, {1.0})});
    ScalarGrid xg(0.0, 1.0, 4), ug(0.0, 1.0, 1);

    ClassicSolveOptions snap_opts;
    auto [ts, ps] = solve_classic(problem, xg, ug, noise,
                                  [](double x) { return ExtendedReal(x * x); }, snap_opts);
    ClassicSolveOptions lin_opts;
    lin_opts.value_read = ValueRead::Linear;
    auto [tl, pl] = solve_classic(problem, xg, ug, noise,
                                  [](double x) { return ExtendedReal(x * x); }, lin_opts);
    // From x = 1 the image 1.5 snaps up to 2.0 squared = 4.0 but interpolates
    // between 1.0 and 4.0 to 2.5.
    CHECK(ts.value(0, 1).raw() == doctest::Approx(4.0));
    CHECK(tl.value(0, 1).raw() == doctest::Approx(2.5));
}
