#include "msoc/classic_dp.hpp"

#include <cmath>
#include <limits>

#include "msoc/parallel.hpp"

namespace msoc {

namespace {

double read_value(const std::vector<ExtendedReal>& v, const ScalarGrid& grid, double x,
                  ValueRead mode) {
    if (mode == ValueRead::Snap) return v[grid.snap(x)].raw();

    double rel = (x - grid.lo()) / grid.step();
    int i0 = static_cast<int>(std::floor(rel));
    if (i0 < 0) i0 = 0;
    if (i0 >= grid.size() - 1) i0 = grid.size() - 2;
    if (grid.size() == 1) return v[0].raw();
    double frac = rel - i0;
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    double a = v[i0].raw();
    double b = v[i0 + 1].raw();
    if (!std::isfinite(a) || !std::isfinite(b))
        return v[grid.snap(x)].raw(); // interpolation is meaningless across an infinite cell
    return a + frac * (b - a);
}

} // namespace

std::pair<std::vector<ExtendedReal>, std::vector<int>> bellman_stage_update(
    const std::vector<ExtendedReal>& v_next, int t, const ProblemDefinition& problem,
    const ScalarGrid& x_grid, const ScalarGrid& u_grid, const NoiseStage& noise,
    const ClassicSolveOptions& options) {
    if (static_cast<int>(v_next.size()) != x_grid.size())
        fail(ErrorCode::InvalidArgument, "value array does not match the state grid");

    std::vector<ExtendedReal> v_now(x_grid.size());
    std::vector<int> best_u(x_grid.size(), 0);

    parallel_for(0, x_grid.size(), options.threads, [&](int xi) {
        double x = x_grid.point(xi);
        double best = std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (int ui = 0; ui < u_grid.size(); ++ui) {
            double u = u_grid.point(ui);
            double acc = 0.0;
            for (int j = 0; j < noise.size(); ++j) {
                double w = noise.value(j);
                double xn = problem.dynamics(t, x, u, w);
                acc += noise.prob(j) *
                       (problem.stage_cost(t, x, u, w) +
                        read_value(v_next, x_grid, xn, options.value_read));
                if (!std::isfinite(acc)) {
                    acc = std::numeric_limits<double>::infinity();
                    break;
                }
            }
            if (acc < best) {
                best = acc;
                best_idx = ui;
            }
        }
        v_now[xi] = ExtendedReal(best);
        best_u[xi] = best_idx;
    });
    return {std::move(v_now), std::move(best_u)};
}

std::pair<ValueTable, StatePolicy> solve_classic(
    const ProblemDefinition& problem, const ScalarGrid& x_grid, const ScalarGrid& u_grid,
    const NoiseModel& noise, const TerminalValueFn& terminal,
    const ClassicSolveOptions& options) {
    int t0 = problem.horizon.t0;
    int T = problem.horizon.T;
    if (noise.stage_count() < T)
        fail(ErrorCode::InvalidArgument, "noise model shorter than the horizon");

    ValueTable table;
    table.t0 = t0;
    table.T = T;
    table.x_grid = x_grid;
    table.stages.assign(T - t0 + 1, {});

    StatePolicy policy;
    policy.t0 = t0;
    policy.T = T;
    policy.x_grid = x_grid;
    policy.u_grid = u_grid;
    policy.u_idx.assign(T - t0, {});

    auto& v_final = table.stages[T - t0];
    v_final.resize(x_grid.size());
    for (int xi = 0; xi < x_grid.size(); ++xi) v_final[xi] = terminal(x_grid.point(xi));

    for (int t = T - 1; t >= t0; --t) {
        auto [v, u] = bellman_stage_update(table.stages[t + 1 - t0], t, problem, x_grid,
                                           u_grid, noise.stage(t), options);
        table.stages[t - t0] = std::move(v);
        policy.u_idx[t - t0] = std::move(u);
    }
    return {std::move(table), std::move(policy)};
}

} // namespace msoc
