#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "msoc/audit.hpp"
#include "msoc/dam.hpp"
#include "msoc/extended_dp.hpp"
#include "msoc/inner_solver.hpp"
#include "msoc/simulate.hpp"
#include "msoc/uzawa.hpp"

namespace msoc {

/// Solver knobs exposed through the config file; "auto" values resolve from
/// the instance (see InnerSolveConfig).
struct SolverSection {
    InnerMethod inner_method = InnerMethod::MuScan;
    double eps_mart = -1.0;  // auto
    double delta_s = 0.0;    // auto
    int mu_points = 201;
    double mu_max = 0.0;     // auto
    int polish_passes = 2;
    double audit_fraction = 0.01;
    std::uint64_t audit_seed = 424243;
    ValueRead value_read = ValueRead::Snap;
};

struct SimulationSection {
    int scenarios = 10000;
    std::uint64_t seed = 20120;
};

/// Whole-run configuration: the benchmark instance plus every solver knob.
struct AppConfig {
    int schema_version = 1;
    DamConfig dam;
    SolverSection solver;
    UzawaConfig uzawa;
    SimulationSection simulation;
    AuditTolerances audit;
    int threads = 0; // 0 = hardware concurrency
};

AppConfig default_app_config();
AppConfig parse_app_config(const nlohmann::json& j);
nlohmann::json app_config_to_json(const AppConfig& config);
AppConfig load_app_config(const std::filesystem::path& path);
void save_app_config(const AppConfig& config, const std::filesystem::path& path);

/// Inner-solver configuration resolved against a concrete instance.
InnerSolveConfig make_inner_config(const AppConfig& config, const DamInstance& instance);
int resolve_threads(const AppConfig& config);

/// Floats in CSV artifacts carry nine significant digits.
std::string fmt9(double v);

constexpr int kSummarySchemaVersion = 1;

/// Writes dir/summary.json with schema_version stamped in.
void write_summary(const std::filesystem::path& dir, nlohmann::json summary);

/// Strict read: schema version must match and no unknown top-level field is
/// accepted for the run kind.
nlohmann::json read_summary(const std::filesystem::path& dir);

void write_value_table_csv(const std::filesystem::path& path, const ValueTable& table);
void write_value_table_csv(const std::filesystem::path& path, const ExtendedValueTable& table);

void write_policy_csv(const std::filesystem::path& path, const StatePolicy& policy);
void write_policy_csv(const std::filesystem::path& path, const ExtendedPolicy& policy);

StatePolicy load_state_policy_csv(const std::filesystem::path& path, const ScalarGrid& x_grid,
                                  const ScalarGrid& u_grid, int t0, int T);
ExtendedPolicy load_extended_policy_csv(const std::filesystem::path& path,
                                        const DamInstance& instance);
ExtendedValueTable load_extended_value_table_csv(const std::filesystem::path& path,
                                                 const DamInstance& instance);

void write_trajectories_csv(const std::filesystem::path& path,
                            const std::vector<Trajectory>& trajectories, int final_stage,
                            bool extended);

nlohmann::json verdict_to_json(const AuditVerdict& verdict);
nlohmann::json history_to_json(const UzawaHistory& history);
nlohmann::json certificate_to_json(const EverettCertificate& certificate);

} // namespace msoc
