#include "msoc/audit.hpp"

#include <cmath>

#include "msoc/parallel.hpp"

namespace msoc {

namespace {

bool feasible_within(const std::vector<double>& achieved, const std::vector<double>& b,
                     double tol) {
    for (std::size_t i = 0; i < b.size(); ++i)
        if (achieved[i] > b[i] + tol) return false;
    return true;
}

double max_gap(const std::vector<double>& achieved, const std::vector<double>& b) {
    double g = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i) g = std::max(g, achieved[i] - b[i]);
    return g;
}

double probability_at_level(const DistributionOverGrid& dist, double level) {
    double p = 0.0;
    int nz = dist.z_grid ? dist.z_grid->size() : 1;
    for (int xi = 0; xi < dist.x_grid.size(); ++xi) {
        if (dist.x_grid.point(xi) < level) continue;
        for (int zi = 0; zi < nz; ++zi) p += dist.p[xi * nz + zi];
    }
    return p;
}

} // namespace

StatePolicy truncate_policy(const StatePolicy& policy, int t) {
    if (t < policy.t0 || t >= policy.T)
        fail(ErrorCode::OutOfHorizon, "truncation stage outside the policy horizon");
    StatePolicy out;
    out.t0 = t;
    out.T = policy.T;
    out.x_grid = policy.x_grid;
    out.u_grid = policy.u_grid;
    out.u_idx.assign(policy.u_idx.begin() + (t - policy.t0), policy.u_idx.end());
    return out;
}

ExtendedPolicy truncate_policy(const ExtendedPolicy& policy, int t) {
    if (t < policy.t0 || t >= policy.T)
        fail(ErrorCode::OutOfHorizon, "truncation stage outside the policy horizon");
    ExtendedPolicy out;
    out.t0 = t;
    out.T = policy.T;
    out.x_grid = policy.x_grid;
    out.z_grid = policy.z_grid;
    out.u_grid = policy.u_grid;
    out.v_grid = policy.v_grid;
    out.atom_count.assign(policy.atom_count.begin() + (t - policy.t0),
                          policy.atom_count.end());
    out.u_idx.assign(policy.u_idx.begin() + (t - policy.t0), policy.u_idx.end());
    out.v_idx.assign(policy.v_idx.begin() + (t - policy.t0), policy.v_idx.end());
    return out;
}

AuditVerdict audit_restart_dual(const DualAuditInput& input, int restart_t, double x) {
    AuditVerdict verdict;
    verdict.method = "dual";
    verdict.restart_t = restart_t;
    verdict.restart_x = x;
    verdict.required_b = input.b;

    StatePolicy truncated = truncate_policy(input.policy, restart_t);

    auto push = pushforward_value(input.problem, truncated, x, restart_t, input.noise);
    verdict.truncated_value = push.expected_cost;
    verdict.achieved_pushforward = constraint_from_distribution(
        push.final_distribution, input.problem.constraint, input.problem.constraint_dim);

    SimulateOptions sim_opts;
    sim_opts.threads = input.threads;
    sim_opts.probability_level = input.probability_level;
    sim_opts.keep_trajectories = false;
    auto sim = simulate_classic(input.problem, truncated, x, restart_t,
                                input.scenario_count, input.seed, input.noise, sim_opts);
    verdict.mc_cost = sim.report.mean_cost;
    verdict.achieved_mc = sim.report.constraint_mean;
    if (input.probability_level) {
        verdict.probability_pushforward =
            probability_at_level(push.final_distribution, *input.probability_level);
        verdict.probability_mc = sim.report.probability.value_or(0.0);
    }

    // Fresh dual solve of the remaining horizon at the same required level.
    ProblemDefinition rest = input.problem;
    rest.horizon = TimeHorizon(restart_t, input.problem.horizon.T);
    ClassicSolveOptions solve_opts;
    solve_opts.threads = input.threads;
    auto resolved = uzawa_solve(rest, input.x_grid, input.u_grid, input.noise, input.b, x,
                                input.resolve_cfg, solve_opts);
    verdict.resolved_value = resolved.dual_value;
    verdict.resolve_converged = resolved.converged;

    verdict.feasible_pushforward = feasible_within(verdict.achieved_pushforward, input.b,
                                                   input.tolerances.constraint_pushforward);
    verdict.feasible_mc =
        feasible_within(verdict.achieved_mc, input.b, input.tolerances.constraint_mc);
    verdict.constraint_gap = max_gap(verdict.achieved_pushforward, input.b);
    verdict.value_gap = verdict.truncated_value - verdict.resolved_value;
    verdict.value_ok =
        verdict.truncated_value <= verdict.resolved_value +
                                       input.tolerances.value_rel *
                                           std::max(1.0, std::abs(verdict.resolved_value));
    verdict.consistent =
        verdict.feasible_pushforward && verdict.feasible_mc && verdict.value_ok;
    return verdict;
}

AuditVerdict audit_restart_extended(const ExtendedAuditInput& input, int restart_t,
                                    double x, double z,
                                    const std::optional<std::vector<double>>& required_b) {
    AuditVerdict verdict;
    verdict.method = "extended";
    verdict.restart_t = restart_t;
    verdict.restart_x = x;
    verdict.restart_z = z;
    verdict.required_b = required_b ? *required_b : std::vector<double>{z};

    int xi = input.table.x_grid.snap(x);
    int zi = input.table.z_grid.snap(z);
    ExtendedReal cell = input.table.value(restart_t, xi, zi);
    if (!cell.is_finite()) {
        verdict.skipped_infinite = true;
        verdict.resolved_value = cell.raw();
        return verdict;
    }
    verdict.resolved_value = cell.value(); // optimum by table lookup, no re-solve needed

    ExtendedPolicy truncated = truncate_policy(input.policy, restart_t);
    auto push = pushforward_value_extended(input.problem, truncated, x, z, restart_t,
                                           input.noise);
    verdict.truncated_value = push.expected_cost;
    verdict.achieved_pushforward = constraint_from_distribution(
        push.final_distribution, input.problem.constraint, input.problem.constraint_dim);

    SimulateOptions sim_opts;
    sim_opts.threads = input.threads;
    sim_opts.probability_level = input.probability_level;
    sim_opts.keep_trajectories = false;
    auto sim = simulate_extended(input.problem, truncated, x, z, restart_t,
                                 input.scenario_count, input.seed, input.noise, sim_opts);
    verdict.mc_cost = sim.report.mean_cost;
    verdict.achieved_mc = sim.report.constraint_mean;
    if (input.probability_level) {
        verdict.probability_pushforward =
            probability_at_level(push.final_distribution, *input.probability_level);
        verdict.probability_mc = sim.report.probability.value_or(0.0);
    }

    verdict.feasible_pushforward =
        feasible_within(verdict.achieved_pushforward, verdict.required_b,
                        input.tolerances.constraint_pushforward);
    verdict.feasible_mc = feasible_within(verdict.achieved_mc, verdict.required_b,
                                          input.tolerances.constraint_mc);
    verdict.constraint_gap = max_gap(verdict.achieved_pushforward, verdict.required_b);
    verdict.value_gap = verdict.truncated_value - verdict.resolved_value;
    verdict.value_ok =
        verdict.truncated_value <= verdict.resolved_value +
                                       input.tolerances.value_rel *
                                           std::max(1.0, std::abs(verdict.resolved_value));
    verdict.consistent =
        verdict.feasible_pushforward && verdict.feasible_mc && verdict.value_ok;
    return verdict;
}

SweepSummary sweep_audit_dual(const DualAuditInput& input, int restart_t,
                              const std::vector<double>& x_values) {
    SweepSummary summary;
    summary.verdicts.resize(x_values.size());
    parallel_for(0, static_cast<int>(x_values.size()), input.threads, [&](int i) {
        DualAuditInput serial = input;
        serial.threads = 1;
        summary.verdicts[i] = audit_restart_dual(serial, restart_t, x_values[i]);
    });
    for (const auto& v : summary.verdicts) {
        if (v.skipped_infinite)
            ++summary.skipped_count;
        else if (v.consistent)
            ++summary.consistent_count;
        else
            ++summary.inconsistent_count;
    }
    return summary;
}

SweepSummary sweep_audit_extended(const ExtendedAuditInput& input, int restart_t,
                                  const std::vector<double>& x_values,
                                  const std::vector<double>& z_values) {
    SweepSummary summary;
    const int nx = static_cast<int>(x_values.size());
    const int nz = static_cast<int>(z_values.size());
    summary.verdicts.resize(static_cast<std::size_t>(nx) * nz);
    parallel_for(0, nx * nz, input.threads, [&](int i) {
        ExtendedAuditInput serial = input;
        serial.threads = 1;
        summary.verdicts[i] = audit_restart_extended(serial, restart_t, x_values[i / nz],
                                                     z_values[i % nz]);
    });
    for (const auto& v : summary.verdicts) {
        if (v.skipped_infinite)
            ++summary.skipped_count;
        else if (v.consistent)
            ++summary.consistent_count;
        else
            ++summary.inconsistent_count;
    }
    return summary;
}

} // namespace msoc
