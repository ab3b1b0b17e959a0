#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msoc/extended_dp.hpp"
#include "msoc/simulate.hpp"
#include "msoc/uzawa.hpp"

namespace msoc {

/// Drops stages before t; stages from t on are preserved bit-identically.
StatePolicy truncate_policy(const StatePolicy& policy, int t);
ExtendedPolicy truncate_policy(const ExtendedPolicy& policy, int t);

struct AuditTolerances {
    double constraint_pushforward = 0.01;
    double constraint_mc = 0.015;
    double value_rel = 0.02;
};

/// Outcome of restarting a solved policy mid-horizon: does it still meet the
/// required constraint level and stay near the optimum re-solved at the
/// restart point? A policy is consistent when it is feasible (one-sided, the
/// constraint may be slack) within tolerance and not worse in value.
struct AuditVerdict {
    std::string method;
    int restart_t = 0;
    double restart_x = 0.0;
    std::optional<double> restart_z;
    std::vector<double> required_b;
    std::vector<double> achieved_pushforward; // E[g(x_T)], exact
    std::vector<double> achieved_mc;          // E[g(x_T)], Monte Carlo
    double probability_pushforward = 0.0;     // when an indicator level applies
    double probability_mc = 0.0;
    double resolved_value = 0.0;              // fresh optimum at the restart point
    double truncated_value = 0.0;             // exact value of the truncated policy
    double mc_cost = 0.0;
    bool consistent = false;
    bool feasible_pushforward = false;
    bool feasible_mc = false;
    bool value_ok = false;
    double constraint_gap = 0.0;              // max_i (achieved - required)_i
    double value_gap = 0.0;                   // truncated - resolved
    bool resolve_converged = true;
    bool skipped_infinite = false;            // restart cell has infinite value
};

struct DualAuditInput {
    const ProblemDefinition& problem;
    const ScalarGrid& x_grid;
    const ScalarGrid& u_grid;
    const NoiseModel& noise;
    const StatePolicy& policy;       // solved at the initial time
    std::vector<double> b;           // required level
    UzawaConfig resolve_cfg;         // used to re-solve from the restart point
    AuditTolerances tolerances;
    int scenario_count = 10000;
    std::uint64_t seed = 0;
    std::optional<double> probability_level;
    int threads = 1;
};

AuditVerdict audit_restart_dual(const DualAuditInput& input, int restart_t, double x);

struct ExtendedAuditInput {
    const ProblemDefinition& problem;
    const NoiseModel& noise;
    const ExtendedValueTable& table;
    const ExtendedPolicy& policy;
    AuditTolerances tolerances;
    int scenario_count = 10000;
    std::uint64_t seed = 0;
    std::optional<double> probability_level;
    int threads = 1;
};

/// The extended method re-solves by table lookup: the remaining-horizon
/// optimum from (t, x, z) is the already-computed cell value.
AuditVerdict audit_restart_extended(const ExtendedAuditInput& input, int restart_t,
                                    double x, double z,
                                    const std::optional<std::vector<double>>& required_b =
                                        std::nullopt);

struct SweepSummary {
    std::vector<AuditVerdict> verdicts;
    int consistent_count = 0;
    int inconsistent_count = 0;
    int skipped_count = 0;
};

SweepSummary sweep_audit_dual(const DualAuditInput& input, int restart_t,
                              const std::vector<double>& x_values);

SweepSummary sweep_audit_extended(const ExtendedAuditInput& input, int restart_t,
                                  const std::vector<double>& x_values,
                                  const std::vector<double>& z_values);

} // namespace msoc
