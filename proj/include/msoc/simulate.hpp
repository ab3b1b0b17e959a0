#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msoc/classic_dp.hpp"
#include "msoc/extended_dp.hpp"
#include "msoc/noise.hpp"
#include "msoc/problem.hpp"

namespace msoc {

/// Probability vector over the state grid, or over the (x, z) product grid
/// when a z grid is attached.
struct DistributionOverGrid {
    int stage = 0;
    ScalarGrid x_grid;
    std::optional<ScalarGrid> z_grid;
    std::vector<double> p;

    int cells() const {
        return x_grid.size() * (z_grid ? z_grid->size() : 1);
    }
    int cell(int xi, int zi) const { return xi * z_grid->size() + zi; }

    static DistributionOverGrid dirac(const ScalarGrid& grid, int stage, double x);
};

/// Exact Markov propagation of a state distribution under a feedback policy,
/// from the distribution's stage up to t_end. Mass splits across noise atoms
/// and lands on the snapped image state.
DistributionOverGrid pushforward_distribution(const ProblemDefinition& problem,
                                              const StatePolicy& policy,
                                              const DistributionOverGrid& initial,
                                              int t_end, const NoiseModel& noise);

/// E[g(x)] under a distribution at the final stage.
std::vector<double> constraint_from_distribution(const DistributionOverGrid& dist,
                                                 const ConstraintFn& g, int constraint_dim);

/// Expected closed-loop cost (stage costs plus terminal cost) and the final
/// state distribution, propagated exactly.
struct PushforwardValue {
    double expected_cost = 0.0;
    DistributionOverGrid final_distribution;
};

PushforwardValue pushforward_value(const ProblemDefinition& problem,
                                   const StatePolicy& policy, double x0, int t0,
                                   const NoiseModel& noise);

/// Extended-policy analogue over the joint (x, z) distribution. z moves on its
/// grid by construction; any off-grid step or missing profile is an error, not
/// a snap.
PushforwardValue pushforward_value_extended(const ProblemDefinition& problem,
                                            const ExtendedPolicy& policy, double x0,
                                            double z0, int t0, const NoiseModel& noise);

struct Trajectory {
    int t0 = 0;
    std::vector<double> x; // stages + 1 entries
    std::vector<double> u; // per decision stage
    std::vector<double> w;
    std::vector<double> z; // extended runs only, stages + 1 entries
    std::vector<double> v;
};

struct SimulationReport {
    int scenario_count = 0;
    std::uint64_t seed = 0;
    int t0 = 0;
    double mean_cost = 0.0;
    double cost_std_error = 0.0;
    std::vector<double> constraint_mean;      // E[g(x_T)] estimate
    std::optional<double> probability;        // P(x_T >= level) when a level is set
    std::optional<double> mean_z_final;       // extended runs
    std::vector<double> v_stage_means;        // sample mean of v_t per stage
    double max_v_mean_abs = 0.0;
};

struct SimulateOptions {
    int threads = 1;
    std::optional<double> probability_level;  // reports P(x_T >= level)
    bool keep_trajectories = true;
};

struct SimulationOutput {
    SimulationReport report;
    std::vector<Trajectory> trajectories;
};

/// Seeded closed-loop Monte Carlo under a state feedback. Scenario streams
/// are derived per index, so reports and trajectories are bit-identical for a
/// given seed regardless of threading.
SimulationOutput simulate_classic(const ProblemDefinition& problem, const StatePolicy& policy,
                                  double x0, int t0, int scenario_count, std::uint64_t seed,
                                  const NoiseModel& noise, const SimulateOptions& options = {});

/// Closed loop over the augmented state; additionally reports the final-z mean
/// and per-stage sample means of v.
SimulationOutput simulate_extended(const ProblemDefinition& problem,
                                   const ExtendedPolicy& policy, double x0, double z0, int t0,
                                   int scenario_count, std::uint64_t seed,
                                   const NoiseModel& noise, const SimulateOptions& options = {});

} // namespace msoc
