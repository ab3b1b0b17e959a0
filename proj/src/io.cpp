#include "msoc/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace msoc {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& what) {
    fail(ErrorCode::ConfigInvalid, what);
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            bad_config("unknown field '" + it.key() + "' in " + where);
}

double number_or_auto(const json& j, const char* key, double auto_value, double current) {
    if (!j.contains(key)) return current;
    const auto& v = j.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "auto") return auto_value;
        bad_config(std::string(key) + " must be a number or \"auto\"");
    }
    return v.get<double>();
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

AppConfig default_app_config() { return AppConfig{}; }

AppConfig parse_app_config(const json& j) {
    AppConfig cfg;
    reject_unknown(j, {"schema_version", "dam", "solver", "uzawa", "simulation", "audit",
                       "threads"},
                   "config");
    read_if(j, "schema_version", cfg.schema_version);
    if (cfg.schema_version != 1) bad_config("unsupported config schema_version");

    if (j.contains("dam")) {
        const auto& d = j.at("dam");
        reject_unknown(d,
                       {"horizon", "x0", "x_bounds", "u_bounds", "w_bounds", "prices",
                        "target_level", "probability_level", "dx", "du", "dw", "dz", "dv"},
                       "dam");
        read_if(d, "horizon", cfg.dam.horizon);
        read_if(d, "x0", cfg.dam.x0);
        if (d.contains("x_bounds")) {
            auto b = d.at("x_bounds").get<std::vector<double>>();
            if (b.size() != 2) bad_config("x_bounds needs [lo, hi]");
            cfg.dam.x_min = b[0];
            cfg.dam.x_max = b[1];
        }
        if (d.contains("u_bounds")) {
            auto b = d.at("u_bounds").get<std::vector<double>>();
            if (b.size() != 2) bad_config("u_bounds needs [lo, hi]");
            cfg.dam.u_min = b[0];
            cfg.dam.u_max = b[1];
        }
        if (d.contains("w_bounds")) {
            auto b = d.at("w_bounds").get<std::vector<double>>();
            if (b.size() != 2) bad_config("w_bounds needs [lo, hi]");
            cfg.dam.w_min = b[0];
            cfg.dam.w_max = b[1];
        }
        read_if(d, "prices", cfg.dam.prices);
        read_if(d, "target_level", cfg.dam.target_level);
        read_if(d, "probability_level", cfg.dam.probability_level);
        read_if(d, "dx", cfg.dam.dx);
        read_if(d, "du", cfg.dam.du);
        read_if(d, "dw", cfg.dam.dw);
        read_if(d, "dz", cfg.dam.dz);
        read_if(d, "dv", cfg.dam.dv);
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        reject_unknown(s,
                       {"inner_method", "eps_mart", "delta_s", "mu_points", "mu_max",
                        "polish_passes", "audit_fraction", "audit_seed", "value_read"},
                       "solver");
        if (s.contains("inner_method")) {
            std::string m = s.at("inner_method").get<std::string>();
            if (m == "muscan")
                cfg.solver.inner_method = InnerMethod::MuScan;
            else if (m == "sumdp")
                cfg.solver.inner_method = InnerMethod::SumDp;
            else if (m == "exhaustive")
                cfg.solver.inner_method = InnerMethod::Exhaustive;
            else
                bad_config("inner_method must be muscan, sumdp or exhaustive");
        }
        cfg.solver.eps_mart = number_or_auto(s, "eps_mart", -1.0, cfg.solver.eps_mart);
        cfg.solver.delta_s = number_or_auto(s, "delta_s", 0.0, cfg.solver.delta_s);
        read_if(s, "mu_points", cfg.solver.mu_points);
        cfg.solver.mu_max = number_or_auto(s, "mu_max", 0.0, cfg.solver.mu_max);
        read_if(s, "polish_passes", cfg.solver.polish_passes);
        read_if(s, "audit_fraction", cfg.solver.audit_fraction);
        read_if(s, "audit_seed", cfg.solver.audit_seed);
        if (s.contains("value_read")) {
            std::string r = s.at("value_read").get<std::string>();
            if (r == "snap")
                cfg.solver.value_read = ValueRead::Snap;
            else if (r == "linear")
                cfg.solver.value_read = ValueRead::Linear;
            else
                bad_config("value_read must be snap or linear");
        }
    }

    if (j.contains("uzawa")) {
        const auto& u = j.at("uzawa");
        reject_unknown(u,
                       {"rho", "tolerance", "max_iterations", "lambda0", "diminishing",
                        "certificate_tolerance"},
                       "uzawa");
        read_if(u, "rho", cfg.uzawa.rho);
        read_if(u, "tolerance", cfg.uzawa.tolerance);
        read_if(u, "max_iterations", cfg.uzawa.max_iterations);
        read_if(u, "lambda0", cfg.uzawa.lambda0);
        read_if(u, "diminishing", cfg.uzawa.diminishing);
        read_if(u, "certificate_tolerance", cfg.uzawa.certificate_tol);
    }

    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        reject_unknown(s, {"scenarios", "seed"}, "simulation");
        read_if(s, "scenarios", cfg.simulation.scenarios);
        read_if(s, "seed", cfg.simulation.seed);
    }

    if (j.contains("audit")) {
        const auto& a = j.at("audit");
        reject_unknown(a,
                       {"constraint_tolerance_pushforward", "constraint_tolerance_mc",
                        "value_tolerance"},
                       "audit");
        read_if(a, "constraint_tolerance_pushforward", cfg.audit.constraint_pushforward);
        read_if(a, "constraint_tolerance_mc", cfg.audit.constraint_mc);
        read_if(a, "value_tolerance", cfg.audit.value_rel);
    }

    read_if(j, "threads", cfg.threads);
    return cfg;
}

json app_config_to_json(const AppConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["dam"] = {{"horizon", cfg.dam.horizon},
                {"x0", cfg.dam.x0},
                {"x_bounds", {cfg.dam.x_min, cfg.dam.x_max}},
                {"u_bounds", {cfg.dam.u_min, cfg.dam.u_max}},
                {"w_bounds", {cfg.dam.w_min, cfg.dam.w_max}},
                {"prices", cfg.dam.prices},
                {"target_level", cfg.dam.target_level},
                {"probability_level", cfg.dam.probability_level},
                {"dx", cfg.dam.dx},
                {"du", cfg.dam.du},
                {"dw", cfg.dam.dw},
                {"dz", cfg.dam.dz},
                {"dv", cfg.dam.dv}};
    const char* method = cfg.solver.inner_method == InnerMethod::MuScan      ? "muscan"
                         : cfg.solver.inner_method == InnerMethod::SumDp     ? "sumdp"
                                                                             : "exhaustive";
    json eps = cfg.solver.eps_mart < 0 ? json("auto") : json(cfg.solver.eps_mart);
    json ds = cfg.solver.delta_s <= 0 ? json("auto") : json(cfg.solver.delta_s);
    json mm = cfg.solver.mu_max <= 0 ? json("auto") : json(cfg.solver.mu_max);
    j["solver"] = {{"inner_method", method},
                   {"eps_mart", eps},
                   {"delta_s", ds},
                   {"mu_points", cfg.solver.mu_points},
                   {"mu_max", mm},
                   {"polish_passes", cfg.solver.polish_passes},
                   {"audit_fraction", cfg.solver.audit_fraction},
                   {"audit_seed", cfg.solver.audit_seed},
                   {"value_read", cfg.solver.value_read == ValueRead::Snap ? "snap" : "linear"}};
    j["uzawa"] = {{"rho", cfg.uzawa.rho},
                  {"tolerance", cfg.uzawa.tolerance},
                  {"max_iterations", cfg.uzawa.max_iterations},
                  {"lambda0", cfg.uzawa.lambda0},
                  {"diminishing", cfg.uzawa.diminishing},
                  {"certificate_tolerance", cfg.uzawa.certificate_tol}};
    j["simulation"] = {{"scenarios", cfg.simulation.scenarios},
                       {"seed", cfg.simulation.seed}};
    j["audit"] = {{"constraint_tolerance_pushforward", cfg.audit.constraint_pushforward},
                  {"constraint_tolerance_mc", cfg.audit.constraint_mc},
                  {"value_tolerance", cfg.audit.value_rel}};
    j["threads"] = cfg.threads;
    return j;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        bad_config("config parse error in " + path.string() + ": " + e.what());
    }
    try {
        return parse_app_config(j);
    } catch (const json::exception& e) {
        bad_config("config type error in " + path.string() + ": " + e.what());
    }
}

void save_app_config(const AppConfig& config, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << app_config_to_json(config).dump(2) << "\n";
}

InnerSolveConfig make_inner_config(const AppConfig& config, const DamInstance& instance) {
    InnerSolveConfig inner;
    inner.method = config.solver.inner_method;
    inner.v_grid = instance.v_grid;
    inner.delta_s = config.solver.delta_s;
    inner.eps_mart = config.solver.eps_mart;
    inner.mu_points = config.solver.mu_points;
    inner.mu_max = config.solver.mu_max;
    inner.polish_passes = config.solver.polish_passes;
    inner.audit_fraction = config.solver.audit_fraction;
    inner.audit_seed = config.solver.audit_seed;
    inner.threads = resolve_threads(config);
    return inner;
}

int resolve_threads(const AppConfig& config) { return config.threads; }

void write_summary(const std::filesystem::path& dir, json summary) {
    summary["schema_version"] = kSummarySchemaVersion;
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << "\n";
}

json read_summary(const std::filesystem::path& dir) {
    auto in = open_in(dir / "summary.json");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::IoError, "summary parse error: " + std::string(e.what()));
    }
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSummarySchemaVersion)
        fail(ErrorCode::IoError, "unsupported summary schema version in " + dir.string());
    if (!j.contains("kind")) fail(ErrorCode::IoError, "summary without kind in " + dir.string());

    static const std::set<std::string> common = {"schema_version", "kind"};
    static const std::set<std::string> classic = {"lambda", "value_at_start", "t0", "x0"};
    static const std::set<std::string> dual = {"lambda_star",  "converged", "iterations",
                                               "dual_value",   "b_bar",     "pushforward_probability",
                                               "certificate",  "history",   "t0",
                                               "x0"};
    static const std::set<std::string> extended = {"value_at_start", "x0", "z0", "t0",
                                                   "inner_method",   "audit"};
    static const std::set<std::string> simulate = {
        "policy_kind", "n",           "seed",          "t0",
        "x0",          "z0",          "mean_cost",     "cost_std_error",
        "constraint_mean", "probability", "mean_z_final", "v_stage_means",
        "max_v_mean_abs"};
    static const std::set<std::string> audit = {
        "method",          "restart",      "required_level",       "achieved_pushforward",
        "achieved_mc",     "probability_pushforward", "probability_mc", "resolved_value",
        "truncated_value", "mc_cost",      "consistent",           "gaps",
        "resolve_converged", "skipped_infinite"};

    std::string kind = j.at("kind").get<std::string>();
    const std::set<std::string>* allowed = nullptr;
    if (kind == "classic")
        allowed = &classic;
    else if (kind == "dual")
        allowed = &dual;
    else if (kind == "extended")
        allowed = &extended;
    else if (kind == "simulate")
        allowed = &simulate;
    else if (kind == "audit")
        allowed = &audit;
    else
        fail(ErrorCode::IoError, "unknown summary kind '" + kind + "'");

    for (auto it = j.begin(); it != j.end(); ++it)
        if (!common.count(it.key()) && !allowed->count(it.key()))
            fail(ErrorCode::IoError,
                 "unknown field '" + it.key() + "' in " + kind + " summary");
    return j;
}

void write_value_table_csv(const std::filesystem::path& path, const ValueTable& table) {
    auto out = open_out(path);
    out << "stage,x,value\n";
    for (int t = table.t0; t <= table.T; ++t)
        for (int xi = 0; xi < table.x_grid.size(); ++xi)
            out << t << ',' << fmt9(table.x_grid.point(xi)) << ','
                << fmt9(table.value(t, xi).raw()) << '\n';
}

void write_value_table_csv(const std::filesystem::path& path, const ExtendedValueTable& table) {
    auto out = open_out(path);
    out << "stage,x,z,value\n";
    for (int t = table.t0; t <= table.T; ++t)
        for (int xi = 0; xi < table.x_grid.size(); ++xi)
            for (int zi = 0; zi < table.z_grid.size(); ++zi)
                out << t << ',' << fmt9(table.x_grid.point(xi)) << ','
                    << fmt9(table.z_grid.point(zi)) << ','
                    << fmt9(table.value(t, xi, zi).raw()) << '\n';
}

void write_policy_csv(const std::filesystem::path& path, const StatePolicy& policy) {
    auto out = open_out(path);
    out << "stage,x_index,x,u_index,u\n";
    for (int t = policy.t0; t < policy.T; ++t)
        for (int xi = 0; xi < policy.x_grid.size(); ++xi) {
            int ui = policy.control_index(t, xi);
            out << t << ',' << xi << ',' << fmt9(policy.x_grid.point(xi)) << ',' << ui << ','
                << fmt9(policy.u_grid.point(ui)) << '\n';
        }
}

void write_policy_csv(const std::filesystem::path& path, const ExtendedPolicy& policy) {
    auto out = open_out(path);
    out << "stage,x_index,x,z_index,z,u_index,u,v_indices...\n";
    for (int t = policy.t0; t < policy.T; ++t) {
        int atoms = policy.atom_count[t - policy.t0];
        for (int xi = 0; xi < policy.x_grid.size(); ++xi)
            for (int zi = 0; zi < policy.z_grid.size(); ++zi) {
                int ui = policy.control_index(t, xi, zi);
                out << t << ',' << xi << ',' << fmt9(policy.x_grid.point(xi)) << ',' << zi
                    << ',' << fmt9(policy.z_grid.point(zi)) << ',' << ui << ','
                    << (ui >= 0 ? fmt9(policy.u_grid.point(ui)) : "");
                for (int j = 0; j < atoms; ++j)
                    out << ',' << policy.v_index(t, xi, zi, j);
                out << '\n';
            }
    }
}

StatePolicy load_state_policy_csv(const std::filesystem::path& path, const ScalarGrid& x_grid,
                                  const ScalarGrid& u_grid, int t0, int T) {
    auto in = open_in(path);
    StatePolicy policy;
    policy.t0 = t0;
    policy.T = T;
    policy.x_grid = x_grid;
    policy.u_grid = u_grid;
    policy.u_idx.assign(T - t0, std::vector<int>(x_grid.size(), -1));

    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5) fail(ErrorCode::IoError, "malformed policy row: " + line);
        int t = std::stoi(fields[0]);
        int xi = std::stoi(fields[1]);
        int ui = std::stoi(fields[3]);
        if (t < t0 || t >= T || !x_grid.valid_index(xi) || !u_grid.valid_index(ui))
            fail(ErrorCode::IoError, "policy row outside the declared grids: " + line);
        policy.u_idx[t - t0][xi] = ui;
    }
    for (const auto& stage : policy.u_idx)
        for (int ui : stage)
            if (ui < 0) fail(ErrorCode::IoError, "policy file misses entries");
    return policy;
}

ExtendedPolicy load_extended_policy_csv(const std::filesystem::path& path,
                                        const DamInstance& instance) {
    auto in = open_in(path);
    const int t0 = instance.problem.horizon.t0;
    const int T = instance.problem.horizon.T;
    ExtendedPolicy policy;
    policy.t0 = t0;
    policy.T = T;
    policy.x_grid = instance.x_grid;
    policy.z_grid = instance.z_grid;
    policy.u_grid = instance.u_grid;
    policy.v_grid = instance.v_grid;
    policy.atom_count.resize(T - t0);
    policy.u_idx.resize(T - t0);
    policy.v_idx.resize(T - t0);
    const int nx = instance.x_grid.size();
    const int nz = instance.z_grid.size();
    for (int t = t0; t < T; ++t) {
        int atoms = instance.noise.stage(t).size();
        policy.atom_count[t - t0] = atoms;
        policy.u_idx[t - t0].assign(static_cast<std::size_t>(nx) * nz, -1);
        policy.v_idx[t - t0].assign(static_cast<std::size_t>(nx) * nz * atoms, -1);
    }

    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 7) fail(ErrorCode::IoError, "malformed policy row: " + line);
        int t = std::stoi(fields[0]);
        int xi = std::stoi(fields[1]);
        int zi = std::stoi(fields[3]);
        int ui = std::stoi(fields[5]);
        if (t < t0 || t >= T) fail(ErrorCode::IoError, "policy row outside horizon");
        int atoms = policy.atom_count[t - t0];
        if (static_cast<int>(fields.size()) != 7 + atoms)
            fail(ErrorCode::IoError, "policy row has wrong v count: " + line);
        std::size_t cell = static_cast<std::size_t>(xi) * nz + zi;
        policy.u_idx[t - t0][cell] = ui;
        for (int j = 0; j < atoms; ++j)
            policy.v_idx[t - t0][cell * atoms + j] = std::stoi(fields[7 + j]);
    }
    return policy;
}

ExtendedValueTable load_extended_value_table_csv(const std::filesystem::path& path,
                                                 const DamInstance& instance) {
    auto in = open_in(path);
    const int t0 = instance.problem.horizon.t0;
    const int T = instance.problem.horizon.T;
    const int nx = instance.x_grid.size();
    const int nz = instance.z_grid.size();

    ExtendedValueTable table;
    table.t0 = t0;
    table.T = T;
    table.x_grid = instance.x_grid;
    table.z_grid = instance.z_grid;
    table.stages.assign(T - t0 + 1,
                        std::vector<ExtendedReal>(static_cast<std::size_t>(nx) * nz,
                                                  ExtendedReal::infinity()));

    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4) fail(ErrorCode::IoError, "malformed table row: " + line);
        int t = std::stoi(fields[0]);
        int xi = instance.x_grid.snap(std::stod(fields[1]));
        int zi = instance.z_grid.snap(std::stod(fields[2]));
        double v = std::strtod(fields[3].c_str(), nullptr);
        if (t < t0 || t > T) fail(ErrorCode::IoError, "table row outside horizon");
        table.stages[t - t0][static_cast<std::size_t>(xi) * nz + zi] =
            std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::infinity();
    }
    return table;
}

void write_trajectories_csv(const std::filesystem::path& path,
                            const std::vector<Trajectory>& trajectories, int final_stage,
                            bool extended) {
    auto out = open_out(path);
    out << (extended ? "scenario,t,x,u,w,z,v\n" : "scenario,t,x,u,w\n");
    for (std::size_t s = 0; s < trajectories.size(); ++s) {
        const Trajectory& tr = trajectories[s];
        int stages = static_cast<int>(tr.u.size());
        for (int k = 0; k < stages; ++k) {
            out << s << ',' << (tr.t0 + k) << ',' << fmt9(tr.x[k]) << ',' << fmt9(tr.u[k])
                << ',' << fmt9(tr.w[k]);
            if (extended) out << ',' << fmt9(tr.z[k]) << ',' << fmt9(tr.v[k]);
            out << '\n';
        }
        out << s << ',' << final_stage << ',' << fmt9(tr.x[stages]) << ",,";
        if (extended) out << ',' << fmt9(tr.z[stages]) << ',';
        out << '\n';
    }
}

json verdict_to_json(const AuditVerdict& v) {
    json j;
    j["method"] = v.method;
    json restart = {{"t", v.restart_t}, {"x", v.restart_x}};
    if (v.restart_z) restart["z"] = *v.restart_z;
    j["restart"] = restart;
    j["required_level"] = v.required_b;
    j["achieved_pushforward"] = v.achieved_pushforward;
    j["achieved_mc"] = v.achieved_mc;
    j["probability_pushforward"] = v.probability_pushforward;
    j["probability_mc"] = v.probability_mc;
    j["resolved_value"] = v.resolved_value;
    j["truncated_value"] = v.truncated_value;
    j["mc_cost"] = v.mc_cost;
    j["consistent"] = v.consistent;
    j["gaps"] = {{"constraint", v.constraint_gap}, {"value", v.value_gap}};
    j["resolve_converged"] = v.resolve_converged;
    j["skipped_infinite"] = v.skipped_infinite;
    return j;
}

json history_to_json(const UzawaHistory& history) {
    json arr = json::array();
    for (const auto& it : history.iterates)
        arr.push_back({{"k", it.k},
                       {"lambda", it.lambda},
                       {"phi", it.phi},
                       {"b_bar", it.b_bar},
                       {"gradient", it.gradient}});
    return arr;
}

json certificate_to_json(const EverettCertificate& c) {
    return {{"member", c.member}, {"lambda", c.lambda}, {"b_bar", c.b_bar},
            {"b", c.b},           {"slack", c.slack},   {"tol", c.tol}};
}

} // namespace msoc
