#include "msoc/extended_dp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "msoc/parallel.hpp"
#include "msoc/rng.hpp"

namespace msoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;

struct StagePrep {
    StageWeights weights;
    InnerGeometry geom;
    std::vector<VWindow> windows;         // per z index
    std::vector<std::int32_t> next_state; // [(xi * Nu + ui) * J + j]
    std::vector<double> exp_cost;         // [xi * Nu + ui]
    int atoms = 0;
};

StagePrep prepare_stage(const std::vector<ExtendedReal>& v_next, int t,
                        const ProblemDefinition& problem, const ScalarGrid& x_grid,
                        const ScalarGrid& z_grid, const ScalarGrid& u_grid,
                        const NoiseStage& noise, const InnerSolveConfig& cfg) {
    const int nx = x_grid.size();
    const int nz = z_grid.size();
    const int nu = u_grid.size();
    const int atoms = noise.size();
    if (static_cast<int>(v_next.size()) != nx * nz)
        fail(ErrorCode::InvalidArgument, "next-stage table does not match the grids");

    StagePrep prep{StageWeights::from_stage(noise),
                   InnerGeometry(z_grid, cfg.v_grid, StageWeights::from_stage(noise), cfg),
                   {},
                   {},
                   {},
                   atoms};
    prep.windows.resize(nz);
    for (int zi = 0; zi < nz; ++zi) prep.windows[zi] = prep.geom.window(zi);

    prep.next_state.resize(static_cast<std::size_t>(nx) * nu * atoms);
    prep.exp_cost.resize(static_cast<std::size_t>(nx) * nu);
    parallel_for(0, nx, cfg.threads, [&](int xi) {
        double x = x_grid.point(xi);
        for (int ui = 0; ui < nu; ++ui) {
            double u = u_grid.point(ui);
            double acc = 0.0;
            for (int j = 0; j < atoms; ++j) {
                double w = noise.value(j);
                prep.next_state[(static_cast<std::size_t>(xi) * nu + ui) * atoms + j] =
                    x_grid.snap(problem.dynamics(t, x, u, w));
                acc += noise.prob(j) * problem.stage_cost(t, x, u, w);
            }
            prep.exp_cost[static_cast<std::size_t>(xi) * nu + ui] = acc;
        }
    });
    return prep;
}

std::vector<ValueSlice> atom_slices(const std::vector<ExtendedReal>& v_next, int nz,
                                    const StagePrep& prep, int xi, int ui, int nu) {
    std::vector<ValueSlice> slices(prep.atoms);
    for (int j = 0; j < prep.atoms; ++j) {
        int xn = prep.next_state[(static_cast<std::size_t>(xi) * nu + ui) * prep.atoms + j];
        slices[j] = ValueSlice(&v_next[static_cast<std::size_t>(xn) * nz], nz);
    }
    return slices;
}

struct CellSolution {
    double value = kInf;
    int u_idx = 0;
    std::vector<int> v_indices;
};

/// Minimum over the control grid for one cell with a per-call inner solver.
/// Used by the exact methods and by the SumDp audit of MuScan tables.
CellSolution cell_min_over_u(const std::vector<ExtendedReal>& v_next, int nz,
                             const StagePrep& prep, const InnerSolveConfig& cfg,
                             InnerMethod method, int xi, int zi, int nu) {
    CellSolution best;
    bool first = true;
    for (int ui = 0; ui < nu; ++ui) {
        auto slices = atom_slices(v_next, nz, prep, xi, ui, nu);
        InnerResult res;
        switch (method) {
            case InnerMethod::Exhaustive:
                res = inner::exhaustive_solve(slices, zi, prep.geom, cfg.exhaustive_budget);
                break;
            case InnerMethod::SumDp: {
                double ds = cfg.delta_s > 0.0 ? cfg.delta_s
                                              : cfg.v_grid.step() * prep.weights.min_p;
                res = inner::sumdp_solve(slices, zi, prep.geom, ds);
                break;
            }
            case InnerMethod::MuScan: {
                double mm = cfg.mu_max > 0.0
                                ? cfg.mu_max
                                : inner::auto_mu_max(slices, prep.geom.z_grid().step());
                res = inner::muscan_solve(slices, zi, prep.geom,
                                          inner::make_mu_grid(mm, cfg.mu_points),
                                          cfg.polish_passes);
                break;
            }
        }
        double total = prep.exp_cost[static_cast<std::size_t>(xi) * nu + ui] + res.value.raw();
        if (first || total < best.value) {
            best.value = total;
            best.u_idx = ui;
            best.v_indices = std::move(res.v_indices);
            first = false;
        }
    }
    return best;
}

// Windowed minima of W(zeta) + mu * v for every (z, mu) of one next-state row,
// with the -mu*z constant folded in. Monotone-deque pass when the v grid has
// unit stride on the z grid, direct scans otherwise.
void build_mu_profiles(const ExtendedReal* row, const ScalarGrid& z_grid,
                       const InnerGeometry& geom, const std::vector<VWindow>& windows,
                       const std::vector<double>& mu_grid, double* min_out,
                       std::int32_t* arg_out) {
    const int nz = z_grid.size();
    const int nmu = static_cast<int>(mu_grid.size());
    const double dz = z_grid.step();

    for (int mi = 0; mi < nmu; ++mi) {
        const double mu = mu_grid[mi];
        if (geom.stride() == 1) {
            std::deque<int> dq; // zeta indices, scores increasing
            auto score = [&](int zeta) { return row[zeta].raw() + mu * dz * zeta; };
            int added_hi = -1;
            for (int zi = 0; zi < nz; ++zi) {
                const VWindow& w = windows[zi];
                if (w.empty()) {
                    min_out[static_cast<std::size_t>(zi) * nmu + mi] = kInf;
                    arg_out[static_cast<std::size_t>(zi) * nmu + mi] = -1;
                    continue;
                }
                int lo = zi + w.lat(0);
                int hi = zi + w.lat(w.count - 1);
                while (added_hi < hi) {
                    ++added_hi;
                    double s = score(added_hi);
                    // Strict pops keep the oldest (smallest zeta) among ties.
                    while (!dq.empty() && score(dq.back()) > s) dq.pop_back();
                    dq.push_back(added_hi);
                }
                while (!dq.empty() && dq.front() < lo) dq.pop_front();
                int zeta = dq.front();
                min_out[static_cast<std::size_t>(zi) * nmu + mi] =
                    score(zeta) - mu * dz * zi;
                arg_out[static_cast<std::size_t>(zi) * nmu + mi] = zeta;
            }
        } else {
            for (int zi = 0; zi < nz; ++zi) {
                const VWindow& w = windows[zi];
                double m = kInf;
                int arg = -1;
                for (int c = 0; c < w.count; ++c) {
                    int zeta = zi + w.lat(c);
                    double cand = row[zeta].raw() + mu * w.v[c];
                    if (cand < m) {
                        m = cand;
                        arg = zeta;
                    }
                }
                min_out[static_cast<std::size_t>(zi) * nmu + mi] = m;
                arg_out[static_cast<std::size_t>(zi) * nmu + mi] = arg;
            }
        }
    }
}

} // namespace

ExtendedReal terminal_extended_value(double x, const std::vector<double>& z,
                                     const TerminalCostFn& terminal, const ConstraintFn& g) {
    auto gx = g(x);
    if (gx.size() != z.size())
        fail(ErrorCode::InvalidArgument, "constraint and z dimensions differ");
    for (std::size_t i = 0; i < z.size(); ++i)
        if (gx[i] - z[i] > kFeasTol) return ExtendedReal::infinity();
    return ExtendedReal(terminal(x));
}

ExtendedStageOutput extended_stage_update(const std::vector<ExtendedReal>& v_next, int t,
                                          const ProblemDefinition& problem,
                                          const ScalarGrid& x_grid, const ScalarGrid& z_grid,
                                          const ScalarGrid& u_grid, const NoiseStage& noise,
                                          const InnerSolveConfig& cfg) {
    const int nx = x_grid.size();
    const int nz = z_grid.size();
    const int nu = u_grid.size();
    const int atoms = noise.size();

    StagePrep prep = prepare_stage(v_next, t, problem, x_grid, z_grid, u_grid, noise, cfg);

    ExtendedStageOutput out;
    out.values.assign(static_cast<std::size_t>(nx) * nz, ExtendedReal::infinity());
    out.u_idx.assign(static_cast<std::size_t>(nx) * nz, 0);
    out.v_idx.assign(static_cast<std::size_t>(nx) * nz * atoms, -1);

    auto store = [&](int xi, int zi, const CellSolution& sol) {
        std::size_t cell = static_cast<std::size_t>(xi) * nz + zi;
        out.values[cell] =
            std::isfinite(sol.value) ? ExtendedReal(sol.value) : ExtendedReal::infinity();
        out.u_idx[cell] = sol.u_idx;
        if (!sol.v_indices.empty())
            for (int j = 0; j < atoms; ++j)
                out.v_idx[cell * atoms + j] = sol.v_indices[j];
    };

    if (cfg.method != InnerMethod::MuScan) {
        parallel_for(0, nx, cfg.threads, [&](int xi) {
            for (int zi = 0; zi < nz; ++zi)
                store(xi, zi, cell_min_over_u(v_next, nz, prep, cfg, cfg.method, xi, zi, nu));
        });
        return out;
    }

    // MuScan fast path: the multiplier profiles depend only on the next-state
    // row, so they are shared by every cell that reaches it.
    double mu_max = cfg.mu_max;
    if (!(mu_max > 0.0)) {
        double fmin = kInf, fmax = -kInf;
        for (const auto& w : v_next) {
            if (!w.is_finite()) continue;
            fmin = std::min(fmin, w.raw());
            fmax = std::max(fmax, w.raw());
        }
        mu_max = (fmax > fmin) ? (fmax - fmin) / z_grid.step() + 1.0 : 1.0;
    }
    const std::vector<double> mu_grid = inner::make_mu_grid(mu_max, cfg.mu_points);
    const int nmu = static_cast<int>(mu_grid.size());

    std::vector<double> mwin(static_cast<std::size_t>(nx) * nz * nmu);
    std::vector<std::int32_t> marg(static_cast<std::size_t>(nx) * nz * nmu);
    parallel_for(0, nx, cfg.threads, [&](int xn) {
        build_mu_profiles(&v_next[static_cast<std::size_t>(xn) * nz], z_grid, prep.geom,
                          prep.windows, mu_grid,
                          &mwin[static_cast<std::size_t>(xn) * nz * nmu],
                          &marg[static_cast<std::size_t>(xn) * nz * nmu]);
    });

    parallel_for(0, nx, cfg.threads, [&](int xi) {
        std::vector<double> dual(nmu);
        std::vector<double> resid(nmu);
        std::vector<int> seed(atoms);
        for (int ui = 0; ui < nu; ++ui) {
            auto slices = atom_slices(v_next, nz, prep, xi, ui, nu);
            const double ecost = prep.exp_cost[static_cast<std::size_t>(xi) * nu + ui];
            for (int zi = 0; zi < nz; ++zi) {
                const VWindow& window = prep.windows[zi];
                InnerResult res;
                if (window.empty()) {
                    res.value = ExtendedReal::infinity();
                } else {
                    std::fill(dual.begin(), dual.end(), 0.0);
                    std::fill(resid.begin(), resid.end(), 0.0);
                    for (int j = 0; j < atoms; ++j) {
                        int xn = prep.next_state[(static_cast<std::size_t>(xi) * nu + ui) *
                                                     atoms + j];
                        const double pj = prep.weights.p[j];
                        const double* src =
                            &mwin[(static_cast<std::size_t>(xn) * nz + zi) * nmu];
                        const std::int32_t* arg =
                            &marg[(static_cast<std::size_t>(xn) * nz + zi) * nmu];
                        for (int mi = 0; mi < nmu; ++mi) {
                            dual[mi] += pj * src[mi];
                            resid[mi] += pj * static_cast<double>(arg[mi] - zi);
                        }
                    }
                    // Bound from the best multiplier, seed from the most
                    // balanced profile on the multiplier path.
                    double best_bound = -kInf;
                    double best_res = kInf;
                    int seed_mu = -1;
                    for (int mi = 0; mi < nmu; ++mi) {
                        best_bound =
                            std::max(best_bound,
                                     dual[mi] - std::abs(mu_grid[mi]) * prep.geom.eps());
                        if (dual[mi] < kInf && std::abs(resid[mi]) < best_res) {
                            best_res = std::abs(resid[mi]);
                            seed_mu = mi;
                        }
                    }
                    if (seed_mu < 0) {
                        // Some atom is fully blocked; muscan_finish still
                        // stores a feasible fallback so the policy stays total.
                        res = inner::muscan_finish(slices, zi, prep.geom, window, {},
                                                   best_bound, cfg.polish_passes);
                    } else {
                        for (int j = 0; j < atoms; ++j) {
                            int xn =
                                prep.next_state[(static_cast<std::size_t>(xi) * nu + ui) *
                                                    atoms + j];
                            int zeta =
                                marg[(static_cast<std::size_t>(xn) * nz + zi) * nmu + seed_mu];
                            seed[j] = (zeta - zi - window.lat_lo) / window.stride;
                        }
                        res = inner::muscan_finish(slices, zi, prep.geom, window, seed,
                                                   best_bound, cfg.polish_passes);
                    }
                }
                double total = ecost + res.value.raw();
                std::size_t cell = static_cast<std::size_t>(xi) * nz + zi;
                bool take = (ui == 0) || total < out.values[cell].raw();
                if (take) {
                    CellSolution sol;
                    sol.value = total;
                    sol.u_idx = ui;
                    sol.v_indices = std::move(res.v_indices);
                    store(xi, zi, sol);
                }
            }
        }
    });
    return out;
}

ExtendedSolveResult solve_extended(const ProblemDefinition& problem, const ScalarGrid& x_grid,
                                   const ScalarGrid& z_grid, const ScalarGrid& u_grid,
                                   const ScalarGrid& v_grid, const NoiseModel& noise,
                                   InnerSolveConfig cfg) {
    if (problem.constraint_dim != 1)
        fail(ErrorCode::ConfigInvalid,
             "grid solver handles scalar constraints only; use the oracles for m > 1");
    cfg.v_grid = v_grid;

    const int t0 = problem.horizon.t0;
    const int T = problem.horizon.T;
    const int nx = x_grid.size();
    const int nz = z_grid.size();

    ExtendedSolveResult result;
    auto& table = result.table;
    table.t0 = t0;
    table.T = T;
    table.x_grid = x_grid;
    table.z_grid = z_grid;
    table.stages.assign(T - t0 + 1, {});

    auto& policy = result.policy;
    policy.t0 = t0;
    policy.T = T;
    policy.x_grid = x_grid;
    policy.z_grid = z_grid;
    policy.u_grid = u_grid;
    policy.v_grid = v_grid;
    policy.atom_count.assign(T - t0, 0);
    policy.u_idx.assign(T - t0, {});
    policy.v_idx.assign(T - t0, {});

    auto& terminal = table.stages[T - t0];
    terminal.resize(static_cast<std::size_t>(nx) * nz);
    parallel_for(0, nx, cfg.threads, [&](int xi) {
        double x = x_grid.point(xi);
        for (int zi = 0; zi < nz; ++zi)
            terminal[static_cast<std::size_t>(xi) * nz + zi] = terminal_extended_value(
                x, {z_grid.point(zi)}, problem.terminal_cost, problem.constraint);
    });

    ExtendedAuditStats audit;
    for (int t = T - 1; t >= t0; --t) {
        const auto& v_next = table.stages[t + 1 - t0];
        auto out = extended_stage_update(v_next, t, problem, x_grid, z_grid, u_grid,
                                         noise.stage(t), cfg);

        if (cfg.method == InnerMethod::MuScan && cfg.audit_fraction > 0.0) {
            StagePrep prep = prepare_stage(v_next, t, problem, x_grid, z_grid, u_grid,
                                           noise.stage(t), cfg);
            double fmin = kInf, fmax = -kInf;
            for (const auto& w : out.values) {
                if (!w.is_finite()) continue;
                fmin = std::min(fmin, w.raw());
                fmax = std::max(fmax, w.raw());
            }
            double scale = (fmax > fmin) ? fmax - fmin : 1.0;
            audit.value_scale = std::max(audit.value_scale, scale);

            long samples = std::lround(std::ceil(cfg.audit_fraction * nx * nz));
            SplitMix64 rng(cfg.audit_seed ^ (0x9E37ULL * static_cast<std::uint64_t>(t + 1)));
            std::vector<std::pair<int, int>> cells(samples);
            for (auto& c : cells)
                c = {static_cast<int>(rng.next() % nx), static_cast<int>(rng.next() % nz)};

            std::vector<double> gaps(samples, 0.0);
            parallel_for(0, static_cast<int>(samples), cfg.threads, [&](int s) {
                auto [xi, zi] = cells[s];
                CellSolution exact =
                    cell_min_over_u(v_next, nz, prep, cfg, InnerMethod::SumDp, xi, zi,
                                    u_grid.size());
                double fast = out.values[static_cast<std::size_t>(xi) * nz + zi].raw();
                if (std::isfinite(fast) && std::isfinite(exact.value))
                    gaps[s] = fast - exact.value;
                else if (std::isfinite(fast) != std::isfinite(exact.value))
                    gaps[s] = kInf;
            });
            for (double gap : gaps) {
                audit.max_abs_gap = std::max(audit.max_abs_gap, gap);
                audit.max_rel_gap = std::max(audit.max_rel_gap, gap / scale);
            }
            audit.cells_checked += samples;
        }

        table.stages[t - t0] = std::move(out.values);
        policy.u_idx[t - t0] = std::move(out.u_idx);
        policy.v_idx[t - t0] = std::move(out.v_idx);
        policy.atom_count[t - t0] = noise.stage(t).size();
    }
    result.audit = audit;
    return result;
}

} // namespace msoc
