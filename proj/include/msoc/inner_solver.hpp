#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msoc/extended_real.hpp"
#include "msoc/grid.hpp"
#include "msoc/noise.hpp"

namespace msoc {

/// Schemes for the per-cell minimization over the hazard-decision control v,
/// subject to the zero-conditional-mean constraint:
///  - Exhaustive: enumerate every profile (test scale only, exact reference).
///  - SumDp: dynamic program over atoms with the accumulated weighted sum as
///    state; exact whenever the atom weights are rational (integer lattice).
///  - MuScan: multiplier scan on the decoupled Lagrangian followed by a greedy
///    residual repair and a pairwise exchange polish; fast default, upper
///    bounds the exact value and also reports the Lagrangian lower bound.
enum class InnerMethod { Exhaustive, SumDp, MuScan };

struct InnerSolveConfig {
    InnerMethod method = InnerMethod::MuScan;
    ScalarGrid v_grid;
    double delta_s = 0.0;    // sum-state resolution; 0 = automatic
    double eps_mart = -1.0;  // martingale tolerance; negative = automatic
    int mu_points = 201;
    double mu_max = 0.0;     // 0 = derive from the value slices
    int polish_passes = 2;
    double audit_fraction = 0.01; // share of cells re-checked by SumDp in solve_extended
    std::uint64_t audit_seed = 424243;
    int threads = 1;
    std::uint64_t exhaustive_budget = 10000000;
};

struct InnerResult {
    ExtendedReal value = ExtendedReal::infinity();
    std::vector<int> v_indices;           // one v-grid index per atom; empty = infeasible
    std::optional<double> dual_bound;     // MuScan only: decoupled Lagrangian max
    double residual = 0.0;                // |weighted mean| of the returned profile
};

/// Atom probabilities plus their exact rational form when available.
struct StageWeights {
    std::vector<double> p;
    std::optional<RationalWeights> rational;
    double min_p = 0.0;
    bool uniform = false;

    static StageWeights from_probs(const std::vector<double>& probs);
    static StageWeights from_stage(const NoiseStage& stage);
    int size() const { return static_cast<int>(p.size()); }
};

/// Feasible v choices for one z cell: a contiguous index range of the v grid
/// such that z + v stays inside the z grid (out-of-range moves are excluded,
/// never clipped).
struct VWindow {
    int k_lo = 0;      // first feasible v-grid index
    int count = 0;     // number of feasible choices
    int zoff_lo = 0;   // z-grid step offset of k_lo
    int stride = 1;    // z-grid steps per v-grid step
    int lat_lo = 0;    // lattice coordinate of k_lo (z-grid steps)
    std::vector<double> v;  // v values, index c in [0, count)

    bool empty() const { return count == 0; }
    int zoff(int c) const { return zoff_lo + c * stride; }
    int lat(int c) const { return lat_lo + c * stride; }
    int k(int c) const { return k_lo + c; }
};

/// Geometry shared by every cell of a stage: v-grid alignment with the z-grid
/// and the resolved martingale tolerance.
class InnerGeometry {
public:
    InnerGeometry(const ScalarGrid& z_grid, const ScalarGrid& v_grid,
                  const StageWeights& weights, const InnerSolveConfig& cfg);

    const ScalarGrid& z_grid() const { return z_grid_; }
    const ScalarGrid& v_grid() const { return v_grid_; }
    const StageWeights& weights() const { return weights_; }
    double eps() const { return eps_; }
    bool exact() const { return exact_; }
    int stride() const { return stride_; }

    VWindow window(int z_index) const;

    /// Index of v == 0 inside the window, if present.
    std::optional<int> zero_choice(const VWindow& w) const;

    /// Martingale feasibility of an integer lattice sum (exact path).
    bool feasible_lattice(std::int64_t weighted_lat_sum) const;
    /// Same test on a floating weighted sum (general path).
    bool feasible_sum(double weighted_sum) const;

    double lattice_quantum() const { return lattice_quantum_; }
    std::int64_t weight_num(int j) const { return weight_num_[j]; }

private:
    ScalarGrid z_grid_;
    ScalarGrid v_grid_;
    StageWeights weights_;
    double eps_ = 0.0;
    double fuzz_ = 0.0;
    bool exact_ = false;
    int stride_ = 1;   // v step in z steps
    int v_base_ = 0;   // v_grid.lo() in z steps
    double lattice_quantum_ = 0.0; // sum value per lattice unit, z_step/den
    std::vector<std::int64_t> weight_num_;
};

using ValueSlice = std::span<const ExtendedReal>;

/// Minimum over v profiles of sum_j p_j W_j(z + v_j) subject to
/// |sum_j p_j v_j| <= eps, where W_j is the next-stage value along atom j.
/// Returns the optimal value, one achieving profile (exhaustive ties resolve
/// to the lexicographically smallest index profile) and, for MuScan, the
/// Lagrangian lower bound. An empty feasible set yields +infinity with an
/// empty profile.
InnerResult inner_v_minimization(const std::vector<ValueSlice>& atom_values, int z_index,
                                 const ScalarGrid& z_grid, const std::vector<double>& probs,
                                 const InnerSolveConfig& cfg);

namespace inner {

// Shared internals, used by the stage solver's fused fast path.

InnerResult exhaustive_solve(const std::vector<ValueSlice>& slices, int z_index,
                             const InnerGeometry& geom, std::uint64_t budget);

InnerResult sumdp_solve(const std::vector<ValueSlice>& slices, int z_index,
                        const InnerGeometry& geom, double delta_s);

InnerResult muscan_solve(const std::vector<ValueSlice>& slices, int z_index,
                         const InnerGeometry& geom, const std::vector<double>& mu_grid,
                         int polish_passes);

/// Completes MuScan from an already-recovered multiplier profile: greedy
/// repair toward the tolerance, pair-exchange polish, zero-profile fallback.
InnerResult muscan_finish(const std::vector<ValueSlice>& slices, int z_index,
                          const InnerGeometry& geom, const VWindow& window,
                          std::vector<int> seed_choice, double dual_bound,
                          int polish_passes);

/// Multiplier ladder: mu_points values on [0, mu_max], quadratically spaced
/// so small multipliers get most of the resolution.
std::vector<double> make_mu_grid(double mu_max, int mu_points);

/// Automatic ladder roof for the given slices: steepest value change per
/// z-step that could matter.
double auto_mu_max(const std::vector<ValueSlice>& slices, double z_step);

double profile_cost(const std::vector<ValueSlice>& slices, int z_index,
                    const StageWeights& weights, const VWindow& window,
                    const std::vector<int>& choice);

} // namespace inner

} // namespace msoc
