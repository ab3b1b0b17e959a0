#pragma once

#include <cstdint>
#include <vector>

#include "msoc/extended_real.hpp"
#include "msoc/problem.hpp"
#include "msoc/scenario_tree.hpp"

namespace msoc {

/// Brute-force solvers over an enumerated scenario tree. These are the test
/// oracles: exact on toy instances, never meant for production sizes.

using ConstraintVec = std::vector<double>;

struct OracleSolution {
    ExtendedReal value = ExtendedReal(0.0);
    std::vector<int> u_of_node;    // control index per non-leaf node (-1 on leaves)
    std::vector<double> x_of_node; // realized state per node
};

struct OracleExtendedSolution {
    ExtendedReal value = ExtendedReal(0.0);
    std::vector<int> u_of_node;
    std::vector<double> x_of_node;
    std::vector<ConstraintVec> v_of_node; // incoming-edge v per non-root node
    std::vector<ConstraintVec> z_of_node;
};

struct MartingaleConstruction {
    std::vector<ConstraintVec> cond_exp;  // E[g(x_T) | node]
    std::vector<ConstraintVec> v_of_node; // incoming-edge v, empty at the root
    std::vector<ConstraintVec> z_of_node;
};

/// Exact optimum of the unconstrained problem by backward induction on the
/// tree, one control per node.
OracleSolution oracle_solve_unconstrained(const ProblemDefinition& problem,
                                          const std::vector<double>& u_values,
                                          double x0, int t0, const ScenarioTree& tree,
                                          std::uint64_t budget = 10000000);

/// Exact optimum under E[g(x_T)] <= b, by exhaustive enumeration of adapted
/// control maps. Throws Infeasible when no admissible map meets the bound.
OracleSolution oracle_solve_expectation_constrained(
    const ProblemDefinition& problem, const std::vector<double>& u_values, double x0,
    int t0, const ConstraintVec& b, const ScenarioTree& tree,
    std::uint64_t budget = 10000000);

/// Exact optimum of the augmented formulation: controls u per node, controls v
/// per child edge drawn from `v_candidates`, node-wise zero conditional mean,
/// and the almost-sure final constraint g(x_T) - z_T <= 0.
OracleExtendedSolution oracle_solve_extended(const ProblemDefinition& problem,
                                             const std::vector<double>& u_values,
                                             double x0, const ConstraintVec& z0, int t0,
                                             const ScenarioTree& tree,
                                             const std::vector<ConstraintVec>& v_candidates,
                                             std::uint64_t budget = 10000000);

/// Martingale-increment construction from terminal constraint values: v is the
/// per-stage change of the conditional expectation of g(x_T) and z telescopes
/// from z0. Feeds candidate sets for the extended oracle.
MartingaleConstruction construct_martingale_controls(const ScenarioTree& tree,
                                                     const std::vector<ConstraintVec>& leaf_g,
                                                     const ConstraintVec& z0);

/// Candidate v values for oracle_solve_extended: the exact conditional
/// expectation increments of an optimal constrained solution plus zero and a
/// small symmetric grid, so the constructed optimum stays representable.
std::vector<ConstraintVec> default_v_candidates(const ScenarioTree& tree,
                                                const std::vector<ConstraintVec>& leaf_g,
                                                const ConstraintVec& z0,
                                                int extra_grid_points = 2,
                                                double extra_grid_step = 0.5);

} // namespace msoc
