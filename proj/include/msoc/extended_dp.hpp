#pragma once

#include <cstdint>
#include <vector>

#include "msoc/classic_dp.hpp"
#include "msoc/extended_real.hpp"
#include "msoc/grid.hpp"
#include "msoc/inner_solver.hpp"
#include "msoc/noise.hpp"
#include "msoc/problem.hpp"

namespace msoc {

/// Value function over the augmented state (x, z): the physical state plus the
/// running perception of the final expectation constraint. Stage T encodes the
/// almost-sure constraint as an indicator, so cells may be +infinity.
struct ExtendedValueTable {
    int t0 = 0;
    int T = 0;
    ScalarGrid x_grid;
    ScalarGrid z_grid;
    std::vector<std::vector<ExtendedReal>> stages; // stages[t - t0][xi * Nz + zi]

    int cell(int xi, int zi) const { return xi * z_grid.size() + zi; }
    const std::vector<ExtendedReal>& at_stage(int t) const { return stages[t - t0]; }
    ExtendedReal value(int t, int xi, int zi) const {
        return stages[t - t0][cell(xi, zi)];
    }
};

/// Feedbacks of the augmented problem: u decided from (x, z) before the noise,
/// v decided from (x, z) and the realized noise atom. v entries are v-grid
/// indices, -1 marking cells with no feasible profile.
struct ExtendedPolicy {
    int t0 = 0;
    int T = 0;
    ScalarGrid x_grid;
    ScalarGrid z_grid;
    ScalarGrid u_grid;
    ScalarGrid v_grid;
    std::vector<int> atom_count;                    // per decision stage
    std::vector<std::vector<std::int32_t>> u_idx;   // [t - t0][cell]
    std::vector<std::vector<std::int32_t>> v_idx;   // [t - t0][cell * atoms + j]

    int cell(int xi, int zi) const { return xi * z_grid.size() + zi; }
    int control_index(int t, int xi, int zi) const { return u_idx[t - t0][cell(xi, zi)]; }
    int v_index(int t, int xi, int zi, int atom) const {
        return v_idx[t - t0][static_cast<std::size_t>(cell(xi, zi)) * atom_count[t - t0] + atom];
    }
};

/// Gap statistics from re-solving sampled cells with the exact SumDp scheme.
struct ExtendedAuditStats {
    long cells_checked = 0;
    double max_abs_gap = 0.0;
    double max_rel_gap = 0.0;
    double value_scale = 0.0;
};

struct ExtendedSolveResult {
    ExtendedValueTable table;
    ExtendedPolicy policy;
    ExtendedAuditStats audit;
};

/// Stage-T value: K(x) when g(x) <= z componentwise (within a 1e-9 feasibility
/// slack against rounding), +infinity otherwise.
ExtendedReal terminal_extended_value(double x, const std::vector<double>& z,
                                     const TerminalCostFn& terminal, const ConstraintFn& g);

struct ExtendedStageOutput {
    std::vector<ExtendedReal> values;        // [xi * Nz + zi]
    std::vector<std::int32_t> u_idx;         // [cell]
    std::vector<std::int32_t> v_idx;         // [cell * atoms + j]
};

/// One backward step of the augmented Bellman recursion: per cell, minimize
/// over the control grid the expected stage cost plus the inner v-minimization
/// against the next-stage table. Control ties resolve to the smallest index.
ExtendedStageOutput extended_stage_update(const std::vector<ExtendedReal>& v_next, int t,
                                          const ProblemDefinition& problem,
                                          const ScalarGrid& x_grid, const ScalarGrid& z_grid,
                                          const ScalarGrid& u_grid, const NoiseStage& noise,
                                          const InnerSolveConfig& cfg);

/// Full backward sweep over the augmented state space. The scalar-z grid
/// solver requires constraint dimension one; vector constraints are the
/// oracles' job. With the MuScan method a configurable share of cells is
/// re-solved by SumDp and the worst observed gap is reported.
ExtendedSolveResult solve_extended(const ProblemDefinition& problem, const ScalarGrid& x_grid,
                                   const ScalarGrid& z_grid, const ScalarGrid& u_grid,
                                   const ScalarGrid& v_grid, const NoiseModel& noise,
                                   InnerSolveConfig cfg);

} // namespace msoc
