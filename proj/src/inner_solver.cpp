#include "msoc/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <limits>
#include <string>

#include "msoc/errors.hpp"

namespace msoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

} // namespace

StageWeights StageWeights::from_probs(const std::vector<double>& probs) {
    if (probs.empty())
        fail(ErrorCode::InvalidArgument, "need at least one atom weight");
    StageWeights w;
    w.p = probs;
    w.rational = detect_rational_weights(probs);
    w.min_p = *std::min_element(probs.begin(), probs.end());
    if (!(w.min_p > 0.0))
        fail(ErrorCode::InvalidArgument, "atom weights must be positive");
    w.uniform = true;
    for (double p : probs)
        if (std::abs(p - probs.front()) > 1e-12) w.uniform = false;
    return w;
}

StageWeights StageWeights::from_stage(const NoiseStage& stage) {
    std::vector<double> probs(stage.size());
    for (int j = 0; j < stage.size(); ++j) probs[j] = stage.prob(j);
    StageWeights w = from_probs(probs);
    w.rational = stage.rational(); // reuse the cached detection
    return w;
}

InnerGeometry::InnerGeometry(const ScalarGrid& z_grid, const ScalarGrid& v_grid,
                             const StageWeights& weights, const InnerSolveConfig& cfg)
    : z_grid_(z_grid), v_grid_(v_grid), weights_(weights) {
    stride_ = step_multiple(v_grid.step(), z_grid.step());
    if (stride_ < 1)
        fail(ErrorCode::ConfigInvalid, "v grid step must be a positive multiple of the z step");
    v_base_ = step_multiple(v_grid.lo(), z_grid.step());

    exact_ = weights_.rational.has_value();
    if (exact_) {
        const auto& rat = *weights_.rational;
        lattice_quantum_ = z_grid.step() / static_cast<double>(rat.den);
        weight_num_.resize(rat.num.size());
        for (std::size_t j = 0; j < rat.num.size(); ++j)
            weight_num_[j] = static_cast<std::int64_t>(rat.num[j]);
    }

    if (cfg.eps_mart >= 0.0) {
        eps_ = cfg.eps_mart;
    } else {
        bool symmetric =
            std::abs(v_grid.lo() + v_grid.hi()) <= 1e-9 * std::max(1.0, std::abs(v_grid.hi()));
        if (weights_.uniform && exact_ && symmetric)
            eps_ = 0.0;
        else
            eps_ = 0.5 * v_grid.step() * weights_.min_p;
    }
    fuzz_ = 1e-12 * std::max({1.0, std::abs(v_grid.lo()), std::abs(v_grid.hi())});
}

VWindow InnerGeometry::window(int z_index) const {
    VWindow w;
    w.stride = stride_;
    int lo = std::max(0, ceil_div(-z_index - v_base_, stride_));
    int hi = std::min(v_grid_.size() - 1,
                      floor_div(z_grid_.size() - 1 - z_index - v_base_, stride_));
    if (hi < lo) return w;
    w.k_lo = lo;
    w.count = hi - lo + 1;
    w.lat_lo = v_base_ + lo * stride_;
    w.zoff_lo = w.lat_lo;
    w.v.resize(w.count);
    for (int c = 0; c < w.count; ++c) w.v[c] = v_grid_.point(lo + c);
    return w;
}

std::optional<int> InnerGeometry::zero_choice(const VWindow& w) const {
    if (w.empty()) return std::nullopt;
    int num = -w.lat_lo;
    if (num < 0 || num % w.stride != 0) return std::nullopt;
    int c = num / w.stride;
    if (c >= w.count) return std::nullopt;
    return c;
}

bool InnerGeometry::feasible_lattice(std::int64_t weighted_lat_sum) const {
    return std::abs(static_cast<double>(weighted_lat_sum)) * lattice_quantum_ <= eps_ + fuzz_;
}

bool InnerGeometry::feasible_sum(double weighted_sum) const {
    return std::abs(weighted_sum) <= eps_ + fuzz_;
}

namespace inner {

double profile_cost(const std::vector<ValueSlice>& slices, int z_index,
                    const StageWeights& weights, const VWindow& window,
                    const std::vector<int>& choice) {
    // Left fold in atom order; every method reports exactly this sum, so equal
    // profiles give bit-equal values across methods.
    double acc = 0.0;
    for (std::size_t j = 0; j < slices.size(); ++j) {
        acc += weights.p[j] * slices[j][z_index + window.zoff(choice[j])].raw();
        if (acc == kInf) return kInf;
    }
    return acc;
}

namespace {

struct ProfileSums {
    bool exact;
    std::int64_t lat = 0;
    double fp = 0.0;
};

// Residual bookkeeping shared by the three methods so their feasible sets are
// identical, including at the tolerance boundary.
class ResidualTracker {
public:
    ResidualTracker(const InnerGeometry& geom, const VWindow& window)
        : geom_(geom), window_(window) {}

    double weighted_sum(const std::vector<int>& choice) const {
        double s = 0.0;
        for (std::size_t j = 0; j < choice.size(); ++j)
            s += geom_.weights().p[j] * window_.v[choice[j]];
        return s;
    }

    std::int64_t lattice_sum(const std::vector<int>& choice) const {
        std::int64_t s = 0;
        for (std::size_t j = 0; j < choice.size(); ++j)
            s += geom_.weight_num(static_cast<int>(j)) * window_.lat(choice[j]);
        return s;
    }

    bool feasible(const std::vector<int>& choice) const {
        if (geom_.exact()) return geom_.feasible_lattice(lattice_sum(choice));
        return geom_.feasible_sum(weighted_sum(choice));
    }

    double residual_value(const std::vector<int>& choice) const {
        if (geom_.exact())
            return std::abs(static_cast<double>(lattice_sum(choice))) * geom_.lattice_quantum();
        return std::abs(weighted_sum(choice));
    }

private:
    const InnerGeometry& geom_;
    const VWindow& window_;
};

InnerResult infeasible_result() {
    InnerResult r;
    r.value = ExtendedReal::infinity();
    return r;
}

std::vector<int> to_v_indices(const VWindow& window, const std::vector<int>& choice) {
    std::vector<int> out(choice.size());
    for (std::size_t j = 0; j < choice.size(); ++j) out[j] = window.k(choice[j]);
    return out;
}

} // namespace

InnerResult exhaustive_solve(const std::vector<ValueSlice>& slices, int z_index,
                             const InnerGeometry& geom, std::uint64_t budget) {
    const VWindow window = geom.window(z_index);
    if (window.empty()) return infeasible_result();
    const std::size_t atoms = slices.size();

    double total = std::pow(static_cast<double>(window.count), static_cast<double>(atoms));
    if (total > static_cast<double>(budget))
        fail(ErrorCode::BudgetExceeded,
             "exhaustive inner enumeration needs " + std::to_string(total) + " profiles");

    ResidualTracker tracker(geom, window);
    const auto& p = geom.weights().p;

    std::vector<int> choice(atoms, 0);
    std::vector<double> partial_cost(atoms + 1, 0.0);
    std::vector<std::int64_t> partial_lat(atoms + 1, 0);
    std::vector<double> partial_fp(atoms + 1, 0.0);

    double best = kInf;
    std::vector<int> best_choice;
    std::vector<int> first_feasible;

    // Depth-first in lexicographic order; strict improvement keeps the
    // lexicographically smallest optimal profile.
    std::size_t depth = 0;
    choice[0] = -1;
    while (true) {
        if (++choice[depth] >= window.count) {
            if (depth == 0) break;
            --depth;
            continue;
        }
        int c = choice[depth];
        partial_cost[depth + 1] =
            partial_cost[depth] + p[depth] * slices[depth][z_index + window.zoff(c)].raw();
        if (geom.exact())
            partial_lat[depth + 1] =
                partial_lat[depth] + geom.weight_num(static_cast<int>(depth)) * window.lat(c);
        else
            partial_fp[depth + 1] = partial_fp[depth] + p[depth] * window.v[c];

        if (depth + 1 == atoms) {
            bool ok = geom.exact() ? geom.feasible_lattice(partial_lat[atoms])
                                   : geom.feasible_sum(partial_fp[atoms]);
            if (ok) {
                if (first_feasible.empty()) first_feasible = choice;
                if (partial_cost[atoms] < best) {
                    best = partial_cost[atoms];
                    best_choice = choice;
                }
            }
            continue;
        }
        ++depth;
        choice[depth] = -1;
    }

    if (best_choice.empty() && first_feasible.empty()) return infeasible_result();

    InnerResult r;
    if (!best_choice.empty()) {
        r.value = ExtendedReal(best);
        r.v_indices = to_v_indices(window, best_choice);
        r.residual = tracker.residual_value(best_choice);
    } else {
        // Every feasible profile is infinite; keep the first one so policies
        // at infinite cells still satisfy the martingale constraint.
        r.value = ExtendedReal::infinity();
        r.v_indices = to_v_indices(window, first_feasible);
        r.residual = tracker.residual_value(first_feasible);
    }
    return r;
}

InnerResult sumdp_solve(const std::vector<ValueSlice>& slices, int z_index,
                        const InnerGeometry& geom, double delta_s) {
    const VWindow window = geom.window(z_index);
    if (window.empty()) return infeasible_result();
    const int atoms = static_cast<int>(slices.size());
    const auto& p = geom.weights().p;

    // Per-(atom, choice) integer increments of the accumulated weighted sum.
    // Exact lattice when the weights are rational, rounded at delta_s else.
    double quantum = geom.exact() ? geom.lattice_quantum() : delta_s;
    if (!(quantum > 0.0))
        fail(ErrorCode::ConfigInvalid, "sumdp requires a positive sum resolution");

    std::vector<std::int64_t> inc(static_cast<std::size_t>(atoms) * window.count);
    for (int j = 0; j < atoms; ++j)
        for (int c = 0; c < window.count; ++c) {
            std::int64_t e;
            if (geom.exact())
                e = geom.weight_num(j) * window.lat(c);
            else
                e = std::llround(p[j] * window.v[c] / quantum);
            inc[static_cast<std::size_t>(j) * window.count + c] = e;
        }

    std::int64_t lo = 0, hi = 0;
    for (int j = 0; j < atoms; ++j) {
        std::int64_t jmin = inc[static_cast<std::size_t>(j) * window.count];
        std::int64_t jmax = jmin;
        for (int c = 1; c < window.count; ++c) {
            std::int64_t e = inc[static_cast<std::size_t>(j) * window.count + c];
            jmin = std::min(jmin, e);
            jmax = std::max(jmax, e);
        }
        lo += jmin;
        hi += jmax;
    }
    lo = std::min<std::int64_t>(lo, 0);
    hi = std::max<std::int64_t>(hi, 0);
    std::int64_t span = hi - lo + 1;
    if (span > 4000000)
        fail(ErrorCode::BudgetExceeded, "sumdp state space too large; coarsen delta_s");
    const int size = static_cast<int>(span);
    const int origin = static_cast<int>(-lo);

    std::vector<double> prev(size, kInf), cur(size, kInf);
    std::vector<char> prev_reach(size, 0), cur_reach(size, 0);
    std::vector<std::int32_t> val_choice(static_cast<std::size_t>(atoms) * size, -1);
    std::vector<std::int32_t> reach_choice(static_cast<std::size_t>(atoms) * size, -1);

    prev[origin] = 0.0;
    prev_reach[origin] = 1;

    for (int j = 0; j < atoms; ++j) {
        std::fill(cur.begin(), cur.end(), kInf);
        std::fill(cur_reach.begin(), cur_reach.end(), 0);
        for (int s = 0; s < size; ++s) {
            if (!prev_reach[s]) continue;
            for (int c = 0; c < window.count; ++c) {
                std::int64_t e = inc[static_cast<std::size_t>(j) * window.count + c];
                std::int64_t ns = s + e;
                if (ns < 0 || ns >= size) continue;
                int nsi = static_cast<int>(ns);
                if (!cur_reach[nsi]) {
                    cur_reach[nsi] = 1;
                    reach_choice[static_cast<std::size_t>(j) * size + nsi] = c;
                }
                if (prev[s] == kInf) continue;
                double cand = prev[s] + p[j] * slices[j][z_index + window.zoff(c)].raw();
                if (cand < cur[nsi]) {
                    cur[nsi] = cand;
                    val_choice[static_cast<std::size_t>(j) * size + nsi] = c;
                }
            }
        }
        std::swap(prev, cur);
        std::swap(prev_reach, cur_reach);
    }

    int best_state = -1;
    double best = kInf;
    int fallback_state = -1;
    for (int s = 0; s < size; ++s) {
        double sum_value = static_cast<double>(s - origin) * quantum;
        bool ok = geom.exact() ? geom.feasible_lattice(s - origin) : geom.feasible_sum(sum_value);
        if (!ok) continue;
        if (prev_reach[s] && fallback_state < 0) fallback_state = s;
        if (prev[s] < best) {
            best = prev[s];
            best_state = s;
        }
    }

    if (best_state < 0 && fallback_state < 0) return infeasible_result();

    const bool from_value = best_state >= 0;
    const auto& table = from_value ? val_choice : reach_choice;
    int state = from_value ? best_state : fallback_state;

    std::vector<int> choice(atoms, 0);
    for (int j = atoms - 1; j >= 0; --j) {
        int c = table[static_cast<std::size_t>(j) * size + state];
        choice[j] = c;
        state -= static_cast<int>(inc[static_cast<std::size_t>(j) * window.count + c]);
    }

    ResidualTracker tracker(geom, window);
    InnerResult r;
    r.value = from_value ? ExtendedReal(best) : ExtendedReal::infinity();
    r.v_indices = to_v_indices(window, choice);
    r.residual = tracker.residual_value(choice);
    return r;
}

std::vector<double> make_mu_grid(double mu_max, int mu_points) {
    if (!(mu_max > 0.0) || mu_points < 3) return {0.0};
    int half = std::max(1, (mu_points - 1) / 2);
    std::vector<double> grid;
    grid.reserve(2 * half + 1);
    for (int i = -half; i <= half; ++i) {
        double frac = static_cast<double>(std::abs(i)) / static_cast<double>(half);
        double mu = mu_max * frac * frac;
        grid.push_back(i < 0 ? -mu : mu);
    }
    return grid;
}

double auto_mu_max(const std::vector<ValueSlice>& slices, double z_step) {
    double fmin = kInf, fmax = -kInf;
    for (const auto& s : slices)
        for (const auto& w : s) {
            if (!w.is_finite()) continue;
            fmin = std::min(fmin, w.raw());
            fmax = std::max(fmax, w.raw());
        }
    if (!(fmax > fmin)) return 1.0;
    return (fmax - fmin) / z_step + 1.0;
}

InnerResult muscan_finish(const std::vector<ValueSlice>& slices, int z_index,
                          const InnerGeometry& geom, const VWindow& window,
                          std::vector<int> seed_choice, double dual_bound,
                          int polish_passes) {
    InnerResult out = infeasible_result();
    out.dual_bound = dual_bound;
    if (window.empty()) return out;

    const int atoms = static_cast<int>(slices.size());
    const auto& p = geom.weights().p;
    ResidualTracker tracker(geom, window);

    auto finite_at = [&](int j, int c) {
        return slices[j][z_index + window.zoff(c)].is_finite();
    };
    auto w_at = [&](int j, int c) { return slices[j][z_index + window.zoff(c)].raw(); };

    bool any_dead_atom = false;
    for (int j = 0; j < atoms && !any_dead_atom; ++j) {
        bool alive = false;
        for (int c = 0; c < window.count; ++c)
            if (finite_at(j, c)) {
                alive = true;
                break;
            }
        any_dead_atom = !alive;
    }

    std::optional<std::vector<int>> repaired;
    if (!any_dead_atom && static_cast<int>(seed_choice.size()) == atoms) {
        // Greedy repair: single-atom moves that strictly shrink the residual,
        // cheapest cost increase first.
        std::vector<int> cur = std::move(seed_choice);
        bool ok = tracker.feasible(cur);
        int moves_left = 4 * atoms * window.count + 8;
        while (!ok && moves_left-- > 0) {
            double cur_res = tracker.residual_value(cur);
            double best_dcost = kInf;
            double best_res = cur_res;
            int best_j = -1, best_c = -1;
            for (int j = 0; j < atoms; ++j) {
                int cj = cur[j];
                for (int c = 0; c < window.count; ++c) {
                    if (c == cj || !finite_at(j, c)) continue;
                    int old = cur[j];
                    cur[j] = c;
                    double res = tracker.residual_value(cur);
                    if (res < cur_res - 1e-15 * std::max(1.0, cur_res)) {
                        double dcost = p[j] * (w_at(j, c) - w_at(j, old));
                        bool better = dcost < best_dcost - 1e-15 ||
                                      (std::abs(dcost - best_dcost) <= 1e-15 && res < best_res);
                        if (better) {
                            best_dcost = dcost;
                            best_res = res;
                            best_j = j;
                            best_c = c;
                        }
                    }
                    cur[j] = old;
                }
            }
            if (best_j < 0) break;
            cur[best_j] = best_c;
            ok = tracker.feasible(cur);
        }
        if (ok) repaired = cur;
    }

    // Exchange polish: single-atom and two-atom moves that keep the weighted
    // sum within tolerance, first-improvement sweeps. Feasibility prechecks
    // run on the integer lattice, so with a zero tolerance only strictly
    // sum-preserving pairs survive and the sweep stays cheap. Exchange depth
    // covers the whole window at test scale and is capped at two quanta for
    // production-size cells.
    const int max_mult =
        (atoms <= 8 && window.count <= 16) ? std::max(1, window.count - 1) : 2;
    auto polish = [&](std::vector<int>& cur) {
        auto move_ok = [&](int j, int c) { return c >= 0 && c < window.count; };
        for (int pass = 0; pass < polish_passes; ++pass) {
            bool changed = false;
            std::int64_t sum_lat = geom.exact() ? tracker.lattice_sum(cur) : 0;
            double sum_fp = geom.exact() ? 0.0 : tracker.weighted_sum(cur);

            auto try_move = [&](int a, int da, int b, int db) {
                int ca = cur[a] + da;
                if (!move_ok(a, ca) || !finite_at(a, ca)) return;
                int cb = -1;
                if (b >= 0) {
                    cb = cur[b] + db;
                    if (!move_ok(b, cb) || !finite_at(b, cb)) return;
                }
                if (geom.exact()) {
                    std::int64_t delta = geom.weight_num(a) *
                                         static_cast<std::int64_t>(da) * window.stride;
                    if (b >= 0)
                        delta += geom.weight_num(b) * static_cast<std::int64_t>(db) *
                                 window.stride;
                    if (!geom.feasible_lattice(sum_lat + delta)) return;
                    double dcost = p[a] * (w_at(a, ca) - w_at(a, cur[a]));
                    if (b >= 0) dcost += p[b] * (w_at(b, cb) - w_at(b, cur[b]));
                    if (dcost >= -1e-12) return;
                    cur[a] = ca;
                    if (b >= 0) cur[b] = cb;
                    sum_lat += delta;
                    changed = true;
                } else {
                    double delta = p[a] * (window.v[ca] - window.v[cur[a]]);
                    if (b >= 0) delta += p[b] * (window.v[cb] - window.v[cur[b]]);
                    if (!geom.feasible_sum(sum_fp + delta)) return;
                    double dcost = p[a] * (w_at(a, ca) - w_at(a, cur[a]));
                    if (b >= 0) dcost += p[b] * (w_at(b, cb) - w_at(b, cur[b]));
                    if (dcost >= -1e-12) return;
                    cur[a] = ca;
                    if (b >= 0) cur[b] = cb;
                    sum_fp += delta;
                    changed = true;
                }
            };

            for (int a = 0; a < atoms; ++a)
                for (int da = -max_mult; da <= max_mult; ++da)
                    if (da != 0) try_move(a, da, -1, 0);
            for (int a = 0; a < atoms; ++a)
                for (int b = a + 1; b < atoms; ++b)
                    for (int da = -max_mult; da <= max_mult; ++da) {
                        if (da == 0) continue;
                        for (int db = -max_mult; db <= max_mult; ++db) {
                            if (db == 0) continue;
                            try_move(a, da, b, db);
                        }
                    }
            if (!changed) break;
        }
    };

    if (repaired && polish_passes > 0) polish(*repaired);

    std::optional<std::vector<int>> zero;
    if (auto zc = geom.zero_choice(window)) {
        zero = std::vector<int>(atoms, *zc);
        if (!any_dead_atom && polish_passes > 0) polish(*zero);
    }

    double repaired_cost = repaired ? profile_cost(slices, z_index, geom.weights(), window, *repaired)
                                    : kInf;
    double zero_cost =
        zero ? profile_cost(slices, z_index, geom.weights(), window, *zero) : kInf;

    const std::vector<int>* pick = nullptr;
    double pick_cost = kInf;
    if (zero) {
        pick = &*zero;
        pick_cost = zero_cost;
    }
    if (repaired && repaired_cost < pick_cost) {
        pick = &*repaired;
        pick_cost = repaired_cost;
    }
    if (!pick) return out;

    out.value = std::isfinite(pick_cost) ? ExtendedReal(pick_cost) : ExtendedReal::infinity();
    out.v_indices = to_v_indices(window, *pick);
    out.residual = tracker.residual_value(*pick);
    return out;
}

InnerResult muscan_solve(const std::vector<ValueSlice>& slices, int z_index,
                         const InnerGeometry& geom, const std::vector<double>& mu_grid,
                         int polish_passes) {
    const VWindow window = geom.window(z_index);
    if (window.empty()) return infeasible_result();
    const int atoms = static_cast<int>(slices.size());
    const auto& p = geom.weights().p;

    // Decoupled Lagrangian scan: D(mu) = sum_j p_j min_c [W_j(z+v_c) + mu v_c].
    // The bound pays |mu| * eps for the tolerance slack; the repair seed is
    // the scanned profile with the smallest residual, which is where the
    // multiplier path crosses feasibility.
    const int nmu = static_cast<int>(mu_grid.size());
    std::vector<int> argmins(static_cast<std::size_t>(atoms) * nmu, 0);
    double best_bound = -kInf;
    double best_res = kInf;
    int seed_mu = -1;
    for (int mi = 0; mi < nmu; ++mi) {
        double mu = mu_grid[mi];
        double d = 0.0;
        double res = 0.0;
        for (int j = 0; j < atoms; ++j) {
            double m = kInf;
            int arg = 0;
            for (int c = 0; c < window.count; ++c) {
                double cand = slices[j][z_index + window.zoff(c)].raw() + mu * window.v[c];
                if (cand < m) {
                    m = cand;
                    arg = c;
                }
            }
            argmins[static_cast<std::size_t>(j) * nmu + mi] = arg;
            d += p[j] * m;
            res += p[j] * window.v[arg];
        }
        best_bound = std::max(best_bound, d - std::abs(mu) * geom.eps());
        if (d < kInf && std::abs(res) < best_res) {
            best_res = std::abs(res);
            seed_mu = mi;
        }
    }

    std::vector<int> seed;
    if (seed_mu >= 0) {
        seed.resize(atoms);
        for (int j = 0; j < atoms; ++j)
            seed[j] = argmins[static_cast<std::size_t>(j) * nmu + seed_mu];
    }
    return muscan_finish(slices, z_index, geom, window, std::move(seed), best_bound,
                         polish_passes);
}

} // namespace inner

InnerResult inner_v_minimization(const std::vector<ValueSlice>& atom_values, int z_index,
                                 const ScalarGrid& z_grid, const std::vector<double>& probs,
                                 const InnerSolveConfig& cfg) {
    if (atom_values.size() != probs.size())
        fail(ErrorCode::InvalidArgument, "one value slice per atom required");
    if (!z_grid.valid_index(z_index))
        fail(ErrorCode::OutOfRange, "z index outside the z grid");
    for (const auto& s : atom_values)
        if (static_cast<int>(s.size()) != z_grid.size())
            fail(ErrorCode::InvalidArgument, "value slice does not match the z grid");

    StageWeights weights = StageWeights::from_probs(probs);
    InnerGeometry geom(z_grid, cfg.v_grid, weights, cfg);

    switch (cfg.method) {
        case InnerMethod::Exhaustive:
            return inner::exhaustive_solve(atom_values, z_index, geom, cfg.exhaustive_budget);
        case InnerMethod::SumDp: {
            double ds = cfg.delta_s > 0.0 ? cfg.delta_s : cfg.v_grid.step() * weights.min_p;
            return inner::sumdp_solve(atom_values, z_index, geom, ds);
        }
        case InnerMethod::MuScan: {
            double mu_max = cfg.mu_max > 0.0 ? cfg.mu_max
                                             : inner::auto_mu_max(atom_values, z_grid.step());
            auto mu_grid = inner::make_mu_grid(mu_max, cfg.mu_points);
            return inner::muscan_solve(atom_values, z_index, geom, mu_grid, cfg.polish_passes);
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown inner method");
}

} // namespace msoc
