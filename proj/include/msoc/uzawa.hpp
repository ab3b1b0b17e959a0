#pragma once

#include <vector>

#include "msoc/classic_dp.hpp"
#include "msoc/noise.hpp"
#include "msoc/problem.hpp"

namespace msoc {

struct UzawaConfig {
    double rho = 100.0;
    double tolerance = 5e-3;
    int max_iterations = 100;
    std::vector<double> lambda0;   // defaults to zeros
    bool diminishing = false;      // rho / sqrt(k) schedule
    double certificate_tol = 0.01;
};

struct UzawaIterate {
    int k = 0;
    std::vector<double> lambda;
    double phi = 0.0;              // dual function value
    std::vector<double> b_bar;     // E[g(x_T)] under the iterate's policy
    std::vector<double> gradient;  // b_bar - b
};

struct UzawaHistory {
    std::vector<UzawaIterate> iterates;
};

/// Everett-style optimality certificate: the dualized solution at lambda is
/// optimal for the constrained problem at any admissible level b, i.e. active
/// components match b_bar and inactive ones are slack.
struct EverettCertificate {
    std::vector<double> lambda;
    std::vector<double> b_bar;
    std::vector<double> b;
    std::vector<double> slack; // b - b_bar
    bool member = false;
    double tol = 0.0;
};

EverettCertificate everett_certificate(const std::vector<double>& lambda,
                                       const std::vector<double>& b_bar,
                                       const std::vector<double>& b, double tol);

struct DualFunctionResult {
    double value = 0.0;            // phi(lambda) = min dualized cost - lambda . b
    ValueTable table;              // dualized Bellman table
    StatePolicy policy;
    std::vector<double> b_bar;     // exact pushforward of g under the policy
};

/// Evaluates the dual function at lambda >= 0: classic DP with terminal cost
/// K(x) + lambda . g(x), then exact pushforward of the constraint expectation.
DualFunctionResult dual_function(const std::vector<double>& lambda,
                                 const ProblemDefinition& problem, const ScalarGrid& x_grid,
                                 const ScalarGrid& u_grid, const NoiseModel& noise,
                                 const std::vector<double>& b, double x0,
                                 const ClassicSolveOptions& options = {});

struct UzawaResult {
    std::vector<double> lambda;
    bool converged = false;
    int iterations = 0;
    double dual_value = 0.0;
    std::vector<double> b_bar;
    StatePolicy policy;
    ValueTable table;
    UzawaHistory history;
    EverettCertificate certificate;
};

/// Projected-gradient ascent on the dual: lambda <- max(0, lambda + rho (b_bar - b)).
/// Stops when every active component's gradient is within tolerance and every
/// zero component's gradient is non-positive up to tolerance.
UzawaResult uzawa_solve(const ProblemDefinition& problem, const ScalarGrid& x_grid,
                        const ScalarGrid& u_grid, const NoiseModel& noise,
                        const std::vector<double>& b, double x0, const UzawaConfig& cfg,
                        const ClassicSolveOptions& options = {});

} // namespace msoc
