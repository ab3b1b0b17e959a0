#pragma once

#include <vector>

#include "msoc/grid.hpp"
#include "msoc/noise.hpp"
#include "msoc/problem.hpp"

namespace msoc {

/// Reservoir management benchmark: maximize turbine revenue over a year of
/// monthly stages subject to keeping the final volume above a target level
/// with a prescribed probability.
struct DamConfig {
    int horizon = 12;
    double x0 = 10.0;
    double x_min = 0.0, x_max = 20.0;
    double u_min = 0.0, u_max = 3.0;
    double w_min = 0.0, w_max = 4.0;
    std::vector<double> prices = {10, 10, 10, 8, 6, 4, 4, 4, 4, 6, 8, 10};
    double target_level = 10.0;
    double probability_level = 0.9;
    double dx = 0.1, du = 0.3, dw = 0.2;
    double dz = 0.05, dv = 0.05;
};

/// Step at zero is closed: heaviside(0) = 1.
double heaviside(double y);

/// Water actually pushed through the turbines: the decision u capped by what
/// the reservoir holds after the inflow.
double dam_turbinate(double x, double u, double w, double x_min);

/// Volume update with bottom clipping and overflow spill at the top.
double dam_dynamics(double x, double u, double w, double x_min, double x_max);

/// Negative revenue of the stage: -p_t * turbinated amount.
double dam_stage_cost(int t, double x, double u, double w, const std::vector<double>& prices,
                      double x_min);

/// Everything the solvers need for one benchmark instance. The probability
/// constraint is carried as the expectation constraint E[g(x_T)] <= b with
/// g(x) = -heaviside(x - level) and b = -pi; the augmented-state solver uses
/// z0 = b and the grids z in [z0 - 1, z0 + 1], v in [-1, 1].
struct DamInstance {
    DamConfig config;
    ProblemDefinition problem;
    ScalarGrid x_grid;
    ScalarGrid u_grid;
    ScalarGrid w_grid;
    ScalarGrid z_grid;
    ScalarGrid v_grid;
    NoiseModel noise;
    double z0 = 0.0;
    std::vector<double> b;
};

DamInstance build_dam_problem(const DamConfig& config);

} // namespace msoc
