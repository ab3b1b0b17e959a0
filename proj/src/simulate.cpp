#include "msoc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msoc/parallel.hpp"
#include "msoc/rng.hpp"

namespace msoc {

namespace {

constexpr double kFeasTol = 1e-9;

void check_mass(const std::vector<double>& p) {
    double sum = 0.0;
    for (double v : p) sum += v;
    if (std::abs(sum - 1.0) > 1e-10)
        fail(ErrorCode::InvalidArgument, "distribution mass drifted to " + std::to_string(sum));
}

} // namespace

DistributionOverGrid DistributionOverGrid::dirac(const ScalarGrid& grid, int stage, double x) {
    DistributionOverGrid d;
    d.stage = stage;
    d.x_grid = grid;
    d.p.assign(grid.size(), 0.0);
    d.p[grid.snap(x)] = 1.0;
    return d;
}

DistributionOverGrid pushforward_distribution(const ProblemDefinition& problem,
                                              const StatePolicy& policy,
                                              const DistributionOverGrid& initial,
                                              int t_end, const NoiseModel& noise) {
    if (initial.z_grid)
        fail(ErrorCode::InvalidArgument, "state-policy pushforward expects a 1-d distribution");
    if (initial.stage < policy.t0 || t_end > policy.T)
        fail(ErrorCode::OutOfHorizon, "pushforward window outside the policy horizon");

    const ScalarGrid& grid = initial.x_grid;
    std::vector<double> cur = initial.p;
    for (int t = initial.stage; t < t_end; ++t) {
        const NoiseStage& stage = noise.stage(t);
        std::vector<double> next(grid.size(), 0.0);
        for (int xi = 0; xi < grid.size(); ++xi) {
            double mass = cur[xi];
            if (mass == 0.0) continue;
            double x = grid.point(xi);
            double u = policy.control(t, xi);
            for (int j = 0; j < stage.size(); ++j) {
                int xn = grid.snap(problem.dynamics(t, x, u, stage.value(j)));
                next[xn] += mass * stage.prob(j);
            }
        }
        cur = std::move(next);
    }
    check_mass(cur);

    DistributionOverGrid out;
    out.stage = t_end;
    out.x_grid = grid;
    out.p = std::move(cur);
    return out;
}

std::vector<double> constraint_from_distribution(const DistributionOverGrid& dist,
                                                 const ConstraintFn& g, int constraint_dim) {
    std::vector<double> acc(constraint_dim, 0.0);
    int nz = dist.z_grid ? dist.z_grid->size() : 1;
    for (int xi = 0; xi < dist.x_grid.size(); ++xi) {
        double mass = 0.0;
        for (int zi = 0; zi < nz; ++zi) mass += dist.p[xi * nz + zi];
        if (mass == 0.0) continue;
        auto gx = g(dist.x_grid.point(xi));
        for (int i = 0; i < constraint_dim; ++i) acc[i] += mass * gx[i];
    }
    return acc;
}

PushforwardValue pushforward_value(const ProblemDefinition& problem,
                                   const StatePolicy& policy, double x0, int t0,
                                   const NoiseModel& noise) {
    const ScalarGrid& grid = policy.x_grid;
    std::vector<double> cur(grid.size(), 0.0);
    cur[grid.snap(x0)] = 1.0;

    double cost = 0.0;
    for (int t = t0; t < policy.T; ++t) {
        const NoiseStage& stage = noise.stage(t);
        std::vector<double> next(grid.size(), 0.0);
        for (int xi = 0; xi < grid.size(); ++xi) {
            double mass = cur[xi];
            if (mass == 0.0) continue;
            double x = grid.point(xi);
            double u = policy.control(t, xi);
            for (int j = 0; j < stage.size(); ++j) {
                double w = stage.value(j);
                cost += mass * stage.prob(j) * problem.stage_cost(t, x, u, w);
                next[grid.snap(problem.dynamics(t, x, u, w))] += mass * stage.prob(j);
            }
        }
        cur = std::move(next);
    }
    for (int xi = 0; xi < grid.size(); ++xi)
        if (cur[xi] > 0.0) cost += cur[xi] * problem.terminal_cost(grid.point(xi));
    check_mass(cur);

    PushforwardValue out;
    out.expected_cost = cost;
    out.final_distribution.stage = policy.T;
    out.final_distribution.x_grid = grid;
    out.final_distribution.p = std::move(cur);
    return out;
}

PushforwardValue pushforward_value_extended(const ProblemDefinition& problem,
                                            const ExtendedPolicy& policy, double x0,
                                            double z0, int t0, const NoiseModel& noise) {
    const ScalarGrid& xg = policy.x_grid;
    const ScalarGrid& zg = policy.z_grid;
    const int nz = zg.size();
    const int v_base = step_multiple(policy.v_grid.lo(), zg.step());
    const int v_stride = step_multiple(policy.v_grid.step(), zg.step());

    std::vector<double> cur(static_cast<std::size_t>(xg.size()) * nz, 0.0);
    cur[static_cast<std::size_t>(xg.snap(x0)) * nz + zg.snap(z0)] = 1.0;

    double cost = 0.0;
    for (int t = t0; t < policy.T; ++t) {
        const NoiseStage& stage = noise.stage(t);
        std::vector<double> next(cur.size(), 0.0);
        for (int xi = 0; xi < xg.size(); ++xi) {
            for (int zi = 0; zi < nz; ++zi) {
                double mass = cur[static_cast<std::size_t>(xi) * nz + zi];
                if (mass == 0.0) continue;
                double x = xg.point(xi);
                int ui = policy.control_index(t, xi, zi);
                if (ui < 0)
                    fail(ErrorCode::Infeasible,
                         "pushforward reached a cell with no stored control");
                double u = policy.u_grid.point(ui);
                for (int j = 0; j < stage.size(); ++j) {
                    double w = stage.value(j);
                    int vk = policy.v_index(t, xi, zi, j);
                    if (vk < 0)
                        fail(ErrorCode::Infeasible,
                             "pushforward reached a cell with no feasible v profile");
                    int zn = zi + v_base + vk * v_stride;
                    if (zn < 0 || zn >= nz)
                        fail(ErrorCode::OutOfRange, "stored v profile leaves the z grid");
                    cost += mass * stage.prob(j) * problem.stage_cost(t, x, u, w);
                    int xn = xg.snap(problem.dynamics(t, x, u, w));
                    next[static_cast<std::size_t>(xn) * nz + zn] += mass * stage.prob(j);
                }
            }
        }
        cur = std::move(next);
    }
    for (int xi = 0; xi < xg.size(); ++xi) {
        double x = xg.point(xi);
        for (int zi = 0; zi < nz; ++zi) {
            double mass = cur[static_cast<std::size_t>(xi) * nz + zi];
            if (mass == 0.0) continue;
            cost += mass * problem.terminal_cost(x);
            auto gx = problem.g(x);
            for (std::size_t i = 0; i < gx.size(); ++i)
                if (gx[i] - zg.point(zi) > kFeasTol)
                    fail(ErrorCode::Infeasible,
                         "closed loop violated the almost-sure final constraint");
        }
    }
    check_mass(cur);

    PushforwardValue out;
    out.expected_cost = cost;
    out.final_distribution.stage = policy.T;
    out.final_distribution.x_grid = xg;
    out.final_distribution.z_grid = zg;
    out.final_distribution.p = std::move(cur);
    return out;
}

namespace {

struct ScenarioResult {
    double cost = 0.0;
    std::vector<double> g;
    double x_final = 0.0;
    double z_final = 0.0;
};

SimulationReport reduce_reports(const std::vector<ScenarioResult>& results,
                                const std::vector<Trajectory>& trajs, int t0, int stages,
                                std::uint64_t seed, bool extended,
                                const SimulateOptions& options) {
    const int n = static_cast<int>(results.size());
    SimulationReport rep;
    rep.scenario_count = n;
    rep.seed = seed;
    rep.t0 = t0;

    double mean = 0.0;
    for (const auto& r : results) mean += r.cost;
    mean /= n;
    double var = 0.0;
    for (const auto& r : results) var += (r.cost - mean) * (r.cost - mean);
    var = n > 1 ? var / (n - 1) : 0.0;
    rep.mean_cost = mean;
    rep.cost_std_error = std::sqrt(var / n);

    if (!results.front().g.empty()) {
        rep.constraint_mean.assign(results.front().g.size(), 0.0);
        for (const auto& r : results)
            for (std::size_t i = 0; i < r.g.size(); ++i) rep.constraint_mean[i] += r.g[i];
        for (auto& v : rep.constraint_mean) v /= n;
    }

    if (options.probability_level) {
        int hits = 0;
        for (const auto& r : results)
            if (r.x_final >= *options.probability_level) ++hits;
        rep.probability = static_cast<double>(hits) / n;
    }

    if (extended) {
        double zmean = 0.0;
        for (const auto& r : results) zmean += r.z_final;
        rep.mean_z_final = zmean / n;

        rep.v_stage_means.assign(stages, 0.0);
        for (const auto& tr : trajs)
            for (int s = 0; s < stages; ++s) rep.v_stage_means[s] += tr.v[s];
        for (auto& v : rep.v_stage_means) v /= n;
        for (double v : rep.v_stage_means)
            rep.max_v_mean_abs = std::max(rep.max_v_mean_abs, std::abs(v));
    }
    return rep;
}

} // namespace

SimulationOutput simulate_classic(const ProblemDefinition& problem, const StatePolicy& policy,
                                  double x0, int t0, int scenario_count, std::uint64_t seed,
                                  const NoiseModel& noise, const SimulateOptions& options) {
    if (t0 < policy.t0)
        fail(ErrorCode::OutOfHorizon, "simulation starts before the policy horizon");
    const ScalarGrid& grid = policy.x_grid;
    const int stages = policy.T - t0;
    const int xi0 = grid.snap(x0);

    std::vector<ScenarioResult> results(scenario_count);
    std::vector<Trajectory> trajs(scenario_count);

    parallel_for(0, scenario_count, options.threads, [&](int s) {
        SplitMix64 rng = scenario_stream(seed, static_cast<std::uint64_t>(s));
        Trajectory tr;
        tr.t0 = t0;
        tr.x.reserve(stages + 1);
        tr.u.reserve(stages);
        tr.w.reserve(stages);

        int xi = xi0;
        double cost = 0.0;
        tr.x.push_back(grid.point(xi));
        for (int t = t0; t < policy.T; ++t) {
            const NoiseStage& stage = noise.stage(t);
            int wj = stage.sample_index(rng.next_double());
            double x = grid.point(xi);
            double u = policy.control(t, xi);
            double w = stage.value(wj);
            cost += problem.stage_cost(t, x, u, w);
            xi = grid.snap(problem.dynamics(t, x, u, w));
            tr.u.push_back(u);
            tr.w.push_back(w);
            tr.x.push_back(grid.point(xi));
        }
        cost += problem.terminal_cost(grid.point(xi));

        ScenarioResult res;
        res.cost = cost;
        res.x_final = grid.point(xi);
        if (problem.constraint_dim > 0) res.g = problem.g(grid.point(xi));
        results[s] = std::move(res);
        trajs[s] = std::move(tr);
    });

    SimulationOutput out;
    out.report = reduce_reports(results, trajs, t0, stages, seed, false, options);
    if (options.keep_trajectories) out.trajectories = std::move(trajs);
    return out;
}

SimulationOutput simulate_extended(const ProblemDefinition& problem,
                                   const ExtendedPolicy& policy, double x0, double z0, int t0,
                                   int scenario_count, std::uint64_t seed,
                                   const NoiseModel& noise, const SimulateOptions& options) {
    if (t0 < policy.t0)
        fail(ErrorCode::OutOfHorizon, "simulation starts before the policy horizon");
    const ScalarGrid& xg = policy.x_grid;
    const ScalarGrid& zg = policy.z_grid;
    const int stages = policy.T - t0;
    const int xi0 = xg.snap(x0);
    const int zi0 = zg.snap(z0);
    const int v_base = step_multiple(policy.v_grid.lo(), zg.step());
    const int v_stride = step_multiple(policy.v_grid.step(), zg.step());

    std::vector<ScenarioResult> results(scenario_count);
    std::vector<Trajectory> trajs(scenario_count);

    parallel_for(0, scenario_count, options.threads, [&](int s) {
        SplitMix64 rng = scenario_stream(seed, static_cast<std::uint64_t>(s));
        Trajectory tr;
        tr.t0 = t0;
        int xi = xi0, zi = zi0;
        double cost = 0.0;
        tr.x.push_back(xg.point(xi));
        tr.z.push_back(zg.point(zi));
        for (int t = t0; t < policy.T; ++t) {
            const NoiseStage& stage = noise.stage(t);
            int wj = stage.sample_index(rng.next_double());
            double x = xg.point(xi);
            int ui = policy.control_index(t, xi, zi);
            int vk = policy.v_index(t, xi, zi, wj);
            if (ui < 0 || vk < 0)
                fail(ErrorCode::Infeasible,
                     "simulation entered a cell with no feasible control profile");
            double u = policy.u_grid.point(ui);
            double w = stage.value(wj);
            cost += problem.stage_cost(t, x, u, w);
            xi = xg.snap(problem.dynamics(t, x, u, w));
            int zn = zi + v_base + vk * v_stride;
            if (zn < 0 || zn >= zg.size())
                fail(ErrorCode::OutOfRange, "stored v profile leaves the z grid");
            zi = zn;
            tr.u.push_back(u);
            tr.w.push_back(w);
            tr.v.push_back(policy.v_grid.point(vk));
            tr.x.push_back(xg.point(xi));
            tr.z.push_back(zg.point(zi));
        }
        cost += problem.terminal_cost(xg.point(xi));

        auto gx = problem.g(xg.point(xi));
        for (std::size_t i = 0; i < gx.size(); ++i)
            if (gx[i] - zg.point(zi) > kFeasTol)
                fail(ErrorCode::Infeasible,
                     "closed loop violated the almost-sure final constraint");

        ScenarioResult res;
        res.cost = cost;
        res.x_final = xg.point(xi);
        res.z_final = zg.point(zi);
        res.g = gx;
        results[s] = std::move(res);
        trajs[s] = std::move(tr);
    });

    SimulationOutput out;
    out.report = reduce_reports(results, trajs, t0, stages, seed, true, options);
    if (options.keep_trajectories) out.trajectories = std::move(trajs);
    return out;
}

} // namespace msoc
