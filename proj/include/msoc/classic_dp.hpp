#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "msoc/extended_real.hpp"
#include "msoc/grid.hpp"
#include "msoc/noise.hpp"
#include "msoc/problem.hpp"

namespace msoc {

using TerminalValueFn = std::function<ExtendedReal(double x)>;

/// How next-stage values are read at off-grid states: nearest grid point
/// (exact for grid-closed instances) or linear interpolation.
enum class ValueRead { Snap, Linear };

struct ClassicSolveOptions {
    ValueRead value_read = ValueRead::Snap;
    int threads = 1;
};

/// Cost-to-go arrays over the state grid, stages t0..T.
struct ValueTable {
    int t0 = 0;
    int T = 0;
    ScalarGrid x_grid;
    std::vector<std::vector<ExtendedReal>> stages; // stages[t - t0][xi]

    const std::vector<ExtendedReal>& at_stage(int t) const { return stages[t - t0]; }
    ExtendedReal value(int t, int xi) const { return stages[t - t0][xi]; }
};

/// State feedback: control grid index per (stage, state), stages t0..T-1.
struct StatePolicy {
    int t0 = 0;
    int T = 0;
    ScalarGrid x_grid;
    ScalarGrid u_grid;
    std::vector<std::vector<int>> u_idx; // u_idx[t - t0][xi]

    int control_index(int t, int xi) const { return u_idx[t - t0][xi]; }
    double control(int t, int xi) const { return u_grid.point(u_idx[t - t0][xi]); }
};

/// One backward Bellman step: from the stage-(t+1) value array over the state
/// grid to the stage-t values and the minimizing control per state.
/// Ties pick the smallest control index; an infinite continuation makes the
/// whole expectation infinite.
std::pair<std::vector<ExtendedReal>, std::vector<int>> bellman_stage_update(
    const std::vector<ExtendedReal>& v_next, int t, const ProblemDefinition& problem,
    const ScalarGrid& x_grid, const ScalarGrid& u_grid, const NoiseStage& noise,
    const ClassicSolveOptions& options = {});

/// Backward dynamic programming over the full horizon with an explicit
/// terminal value (which may differ from problem.terminal_cost, e.g. when the
/// final constraint has been priced into it).
std::pair<ValueTable, StatePolicy> solve_classic(
    const ProblemDefinition& problem, const ScalarGrid& x_grid, const ScalarGrid& u_grid,
    const NoiseModel& noise, const TerminalValueFn& terminal,
    const ClassicSolveOptions& options = {});

} // namespace msoc
