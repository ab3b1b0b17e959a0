#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msoc/extended_real.hpp"
#include "msoc/grid.hpp"
#include "msoc/noise.hpp"
#include "msoc/rng.hpp"
#include "msoc/scenario_tree.hpp"

using namespace msoc;

TEST_CASE("uniform grid construction") {
    CHECK(make_uniform_grid(0.0, 20.0, 0.1).size() == 201);
    CHECK(make_uniform_grid(0.0, 0.0, 1.0).size() == 1);
    CHECK(make_uniform_grid(0.0, 4.0, 0.2).size() == 21);
    CHECK(make_uniform_grid(-1.9, 0.1, 0.05).size() == 41);
    CHECK_THROWS_AS(make_uniform_grid(0.0, 1.0, 0.3), Error);
    CHECK_THROWS_AS(make_uniform_grid(0.0, 1.0, -0.1), Error);
    CHECK_THROWS_AS(make_uniform_grid(1.0, 0.0, 0.1), Error);
}

TEST_CASE("snap") {
    ScalarGrid g = make_uniform_grid(0.0, 20.0, 0.1);
    CHECK(g.snap(7.0) == 70);
    CHECK(g.snap(7.04) == 70);
    CHECK(g.snap(0.0) == 0);
    CHECK(g.snap(-0.049) == 0);               // within half a step of the edge
    CHECK(g.snap(20.049) == 200);
    CHECK_THROWS_AS(g.snap(20.3), Error);
    CHECK_THROWS_AS(g.snap(-0.3), Error);
}

TEST_CASE("snap is the inverse of point on every grid") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        double lo = -5.0 + 10.0 * rng.next_double();
        double step = 0.01 + rng.next_double();
        int n = 1 + static_cast<int>(rng.next() % 300);
        ScalarGrid g(lo, step, n);
        for (int i = 0; i < n; ++i) CHECK(g.snap(g.point(i)) == i);
    }
}

TEST_CASE("extended real arithmetic") {
    ExtendedReal inf = ExtendedReal::infinity();
    CHECK((inf + 3.0).is_infinite());
    CHECK((0.25 * inf).is_infinite());
    CHECK(min(inf, ExtendedReal(2.0)) == ExtendedReal(2.0));
    CHECK(min(ExtendedReal(2.0), inf) == ExtendedReal(2.0));
    CHECK(min(inf, inf).is_infinite());

    SplitMix64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto draw = [&]() {
            return rng.next() % 5 == 0 ? ExtendedReal::infinity()
                                       : ExtendedReal(rng.next_double() * 10 - 5);
        };
        ExtendedReal a = draw(), b = draw(), c = draw();
        CHECK(min(a, b) == min(b, a));
        CHECK(min(min(a, b), c) == min(a, min(b, c)));
        CHECK(min(a, ExtendedReal::infinity()) == a);
    }
}

TEST_CASE("noise validation") {
    ScalarGrid wg = make_uniform_grid(0.0, 4.0, 0.2);
    std::vector<NoiseStage> stages(12, make_uniform_noise(wg));
    CHECK(validate_noise_model(NoiseModel(std::move(stages))).ok);

    NoiseModel bad_sum(
        {make_noise_stage({0.0, 1.0}, {0.5, 0.6})});
    auto report = validate_noise_model(bad_sum);
    CHECK_FALSE(report.ok);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].stage == 0);

    NoiseModel zero_atom({make_noise_stage({0.0, 1.0, 2.0}, {0.5, 0.0, 0.5})});
    CHECK_FALSE(validate_noise_model(zero_atom).ok);

    CHECK_THROWS_AS(make_noise_stage({1.0, 1.0}, {0.5, 0.5}), Error); // not increasing
}

TEST_CASE("rational weight detection") {
    auto uniform21 = detect_rational_weights(std::vector<double>(21, 1.0 / 21.0));
    REQUIRE(uniform21.has_value());
    CHECK(uniform21->den == 21);

    auto quarters = detect_rational_weights({0.25, 0.75});
    REQUIRE(quarters.has_value());
    CHECK(quarters->den == 4);
    CHECK(quarters->num == std::vector<std::uint64_t>{1, 3});

    double irr = 1.0 / std::sqrt(2.0);
    CHECK_FALSE(detect_rational_weights({irr, 1.0 - irr}).has_value());
}

TEST_CASE("inverse-cdf sampling hits every atom deterministically") {
    NoiseStage stage = make_noise_stage({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5});
    CHECK(stage.sample_index(0.0) == 0);
    CHECK(stage.sample_index(0.1999) == 0);
    CHECK(stage.sample_index(0.2001) == 1);
    CHECK(stage.sample_index(0.4999) == 1);
    CHECK(stage.sample_index(0.5001) == 2);
    CHECK(stage.sample_index(0.9999) == 2);
}

TEST_CASE("tree enumeration") {
    NoiseModel two_by_two({make_noise_stage({0.0, 1.0}, {0.5, 0.5}),
                           make_noise_stage({0.0, 1.0}, {0.5, 0.5})});
    ScenarioTree tree = enumerate_tree(two_by_two, 0, 2);
    CHECK(tree.node_count() == 7);
    auto leaves = tree.leaves();
    REQUIRE(leaves.size() == 4);
    for (int leaf : leaves) CHECK(tree.node(leaf).prob == doctest::Approx(0.25));

    NoiseModel single({make_noise_stage({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5})});
    ScenarioTree t1 = enumerate_tree(single, 0, 1);
    auto l1 = t1.leaves();
    REQUIRE(l1.size() == 3);
    CHECK(t1.node(l1[0]).prob == doctest::Approx(0.2));
    CHECK(t1.node(l1[1]).prob == doctest::Approx(0.3));
    CHECK(t1.node(l1[2]).prob == doctest::Approx(0.5));
}

TEST_CASE("tree budget") {
    ScalarGrid wg = make_uniform_grid(0.0, 4.0, 0.2);
    std::vector<NoiseStage> stages(12, make_uniform_noise(wg));
    NoiseModel model(std::move(stages));
    CHECK_THROWS_WITH_AS(enumerate_tree(model, 0, 12),
                         doctest::Contains("7355827511386641"), Error);
}

TEST_CASE("leaf probabilities sum to one") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        int T = 1 + static_cast<int>(rng.next() % 3);
        std::vector<NoiseStage> stages;
        for (int t = 0; t < T; ++t) {
            int atoms = 2 + static_cast<int>(rng.next() % 3);
            std::vector<double> values(atoms), probs(atoms);
            double total = 0.0;
            for (int j = 0; j < atoms; ++j) {
                values[j] = j;
                probs[j] = 1.0 + static_cast<double>(rng.next() % 5);
                total += probs[j];
            }
            for (auto& p : probs) p /= total;
            stages.push_back(make_noise_stage(values, probs));
        }
        ScenarioTree tree = enumerate_tree(NoiseModel(std::move(stages)), 0, T);
        double mass = 0.0;
        for (int leaf : tree.leaves()) mass += tree.node(leaf).prob;
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    }
}
