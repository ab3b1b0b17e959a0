#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msoc/inner_solver.hpp"
#include "msoc/rng.hpp"

namespace msoc::testing {

/// One randomized inner problem in the shape of the agreement suite: few
/// atoms, small symmetric v grid, rational weights. Slices are nonincreasing
/// in z, which is what value tables look like (larger z relaxes the final
/// constraint); `monotone = false` produces adversarial arbitrary tables for
/// bound-only checks.
struct InnerAgreementStats {
    int instances = 0;
    int exact_matches = 0;       // sumdp value bit-equal to exhaustive
    double max_muscan_gap = 0.0; // relative to the slice value range
    double max_dual_excess = 0.0;
    bool all_residuals_ok = true;
};

inline InnerAgreementStats run_inner_agreement(int count, std::uint64_t seed,
                                               bool monotone = true) {
    SplitMix64 rng(seed);
    InnerAgreementStats stats;

    for (int trial = 0; trial < count; ++trial) {
        int atoms = 1 + static_cast<int>(rng.next() % 4);
        int v_half = 1 + static_cast<int>(rng.next() % 3); // v grid size 3, 5 or 7
        ScalarGrid z_grid(-8.0, 1.0, 17);
        int z_index = 8;
        ScalarGrid v_grid(-static_cast<double>(v_half), 1.0, 2 * v_half + 1);

        std::vector<double> probs(atoms);
        if (rng.next() % 2 == 0) {
            for (auto& p : probs) p = 1.0 / atoms;
        } else {
            // Integer weights over a small denominator.
            std::vector<double> weights(atoms);
            double total = 0.0;
            for (auto& w : weights) {
                w = 1.0 + static_cast<double>(rng.next() % 4);
                total += w;
            }
            for (int j = 0; j < atoms; ++j) probs[j] = weights[j] / total;
        }

        std::vector<std::vector<ExtendedReal>> rows(atoms);
        double lo = 1e300, hi = -1e300;
        for (auto& row : rows) {
            row.resize(z_grid.size());
            double level = 50.0 + 0.5 * static_cast<double>(rng.next() % 101);
            for (auto& cell : row) {
                double value =
                    monotone ? level : 0.5 * static_cast<double>(rng.next() % 201);
                cell = ExtendedReal(value);
                lo = std::min(lo, value);
                hi = std::max(hi, value);
                level -= 0.5 * static_cast<double>(rng.next() % 21);
            }
        }
        double range = std::max(1e-9, hi - lo);
        std::vector<ValueSlice> slices(atoms);
        for (int j = 0; j < atoms; ++j) slices[j] = ValueSlice(rows[j].data(), rows[j].size());

        InnerSolveConfig cfg;
        cfg.v_grid = v_grid;
        cfg.method = InnerMethod::Exhaustive;
        InnerResult ex = inner_v_minimization(slices, z_index, z_grid, probs, cfg);
        cfg.method = InnerMethod::SumDp;
        InnerResult dp = inner_v_minimization(slices, z_index, z_grid, probs, cfg);
        cfg.method = InnerMethod::MuScan;
        InnerResult mu = inner_v_minimization(slices, z_index, z_grid, probs, cfg);

        ++stats.instances;
        if (dp.value.raw() == ex.value.raw()) ++stats.exact_matches;

        double gap = (mu.value.raw() - ex.value.raw()) / range;
        stats.max_muscan_gap = std::max(stats.max_muscan_gap, gap);
        if (mu.dual_bound)
            stats.max_dual_excess =
                std::max(stats.max_dual_excess, (*mu.dual_bound - ex.value.raw()) / range);

        StageWeights weights = StageWeights::from_probs(probs);
        InnerGeometry geom(z_grid, v_grid, weights, cfg);
        for (const InnerResult* r : {&ex, &dp, &mu}) {
            if (r->v_indices.empty()) {
                stats.all_residuals_ok = false;
                continue;
            }
            double sum = 0.0;
            for (int j = 0; j < atoms; ++j)
                sum += probs[j] * v_grid.point(r->v_indices[j]);
            if (!geom.feasible_sum(sum)) stats.all_residuals_ok = false;
        }
    }
    return stats;
}

} // namespace msoc::testing
