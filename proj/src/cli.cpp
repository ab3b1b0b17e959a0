#include "msoc/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "msoc/io.hpp"

namespace msoc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int error_exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigInvalid:
        case ErrorCode::InvalidArgument:
        case ErrorCode::NonIntegralRange:
            return 2;
        case ErrorCode::IoError:
            return 4;
        default:
            return 1;
    }
}

void emit_error(const std::string& code, const std::string& message) {
    json err = {{"error", {{"code", code}, {"message", message}}}};
    std::cerr << err.dump() << "\n";
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = -1; // -1 = take from config
};

AppConfig load_config_with_threads(const CommonArgs& common) {
    AppConfig cfg = common.config_path.empty() ? default_app_config()
                                               : load_app_config(common.config_path);
    if (common.threads >= 0) cfg.threads = common.threads;
    return cfg;
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create output directory " + dir);
    return p;
}

struct RestartSpec {
    int t = 0;
    double x = 0.0;
    std::optional<double> z;
};

RestartSpec parse_restart(const std::string& spec) {
    RestartSpec r;
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : spec) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() < 2 || parts.size() > 3)
        fail(ErrorCode::InvalidArgument, "--restart expects T,X or T,X,Z");
    r.t = std::stoi(parts[0]);
    r.x = std::stod(parts[1]);
    if (parts.size() == 3) r.z = std::stod(parts[2]);
    return r;
}

int cmd_solve_classic(const CommonArgs& common, std::optional<double> lambda) {
    AppConfig cfg = load_config_with_threads(common);
    DamInstance inst = build_dam_problem(cfg.dam);
    fs::path out = prepare_out_dir(common.out_dir);

    ClassicSolveOptions opts;
    opts.value_read = cfg.solver.value_read;
    opts.threads = resolve_threads(cfg);

    TerminalValueFn terminal;
    if (lambda) {
        double l = *lambda;
        const auto& problem = inst.problem;
        terminal = [l, &problem](double x) {
            return ExtendedReal(problem.terminal_cost(x) + l * problem.constraint(x)[0]);
        };
    } else {
        const auto& problem = inst.problem;
        terminal = [&problem](double x) { return ExtendedReal(problem.terminal_cost(x)); };
    }

    auto [table, policy] = solve_classic(inst.problem, inst.x_grid, inst.u_grid, inst.noise,
                                         terminal, opts);

    save_app_config(cfg, out / "config.json");
    write_value_table_csv(out / "value_table.csv", table);
    write_policy_csv(out / "policy.csv", policy);

    json summary = {{"kind", "classic"},
                    {"lambda", lambda ? json(*lambda) : json(nullptr)},
                    {"value_at_start",
                     table.value(0, inst.x_grid.snap(cfg.dam.x0)).raw()},
                    {"t0", 0},
                    {"x0", cfg.dam.x0}};
    write_summary(out, summary);
    std::cout << "solve-classic: value at start "
              << fmt9(table.value(0, inst.x_grid.snap(cfg.dam.x0)).raw()) << "\n";
    return 0;
}

int cmd_solve_dual(const CommonArgs& common, std::optional<double> rho,
                   std::optional<double> tol, std::optional<int> max_iter) {
    AppConfig cfg = load_config_with_threads(common);
    if (rho) cfg.uzawa.rho = *rho;
    if (tol) cfg.uzawa.tolerance = *tol;
    if (max_iter) cfg.uzawa.max_iterations = *max_iter;

    DamInstance inst = build_dam_problem(cfg.dam);
    fs::path out = prepare_out_dir(common.out_dir);

    ClassicSolveOptions opts;
    opts.value_read = cfg.solver.value_read;
    opts.threads = resolve_threads(cfg);

    UzawaResult res = uzawa_solve(inst.problem, inst.x_grid, inst.u_grid, inst.noise, inst.b,
                                  cfg.dam.x0, cfg.uzawa, opts);

    save_app_config(cfg, out / "config.json");
    write_value_table_csv(out / "value_table.csv", res.table);
    write_policy_csv(out / "policy.csv", res.policy);

    // For the benchmark's indicator constraint, E[g] = -P(x_T >= level).
    double probability = -res.b_bar[0];
    json summary = {{"kind", "dual"},
                    {"lambda_star", res.lambda},
                    {"converged", res.converged},
                    {"iterations", res.iterations},
                    {"dual_value", res.dual_value},
                    {"b_bar", res.b_bar},
                    {"pushforward_probability", probability},
                    {"certificate", certificate_to_json(res.certificate)},
                    {"history", history_to_json(res.history)},
                    {"t0", 0},
                    {"x0", cfg.dam.x0}};
    write_summary(out, summary);

    std::cout << "solve-dual: lambda* " << fmt9(res.lambda[0]) << ", dual value "
              << fmt9(res.dual_value) << ", pushforward probability " << fmt9(probability)
              << (res.converged ? "" : " (NOT converged)") << "\n";
    return res.converged ? 0 : 3;
}

int cmd_solve_extended(const CommonArgs& common) {
    AppConfig cfg = load_config_with_threads(common);
    DamInstance inst = build_dam_problem(cfg.dam);
    fs::path out = prepare_out_dir(common.out_dir);

    InnerSolveConfig inner = make_inner_config(cfg, inst);
    ExtendedSolveResult res = solve_extended(inst.problem, inst.x_grid, inst.z_grid,
                                             inst.u_grid, inst.v_grid, inst.noise, inner);

    save_app_config(cfg, out / "config.json");
    write_value_table_csv(out / "value_table.csv", res.table);
    write_policy_csv(out / "policy.csv", res.policy);

    double start_value = res.table
                             .value(0, inst.x_grid.snap(cfg.dam.x0),
                                    inst.z_grid.snap(inst.z0))
                             .raw();
    const char* method = cfg.solver.inner_method == InnerMethod::MuScan      ? "muscan"
                         : cfg.solver.inner_method == InnerMethod::SumDp     ? "sumdp"
                                                                             : "exhaustive";
    json summary = {{"kind", "extended"},
                    {"value_at_start", start_value},
                    {"x0", cfg.dam.x0},
                    {"z0", inst.z0},
                    {"t0", 0},
                    {"inner_method", method},
                    {"audit",
                     {{"cells_checked", res.audit.cells_checked},
                      {"max_abs_gap", res.audit.max_abs_gap},
                      {"max_rel_gap", res.audit.max_rel_gap},
                      {"value_scale", res.audit.value_scale}}}};
    write_summary(out, summary);

    std::cout << "solve-extended: value at (x0, z0) " << fmt9(start_value)
              << ", audit cells " << res.audit.cells_checked << ", max gap "
              << fmt9(res.audit.max_abs_gap) << "\n";
    return 0;
}

int cmd_simulate(const std::string& policy_dir, const CommonArgs& common,
                 std::optional<int> t0_opt, std::optional<double> x0_opt,
                 std::optional<double> z0_opt, std::optional<int> n_opt,
                 std::optional<std::uint64_t> seed_opt) {
    fs::path pdir(policy_dir);
    AppConfig cfg = load_app_config(pdir / "config.json");
    if (common.threads >= 0) cfg.threads = common.threads;
    DamInstance inst = build_dam_problem(cfg.dam);
    json policy_summary = read_summary(pdir);
    std::string kind = policy_summary.at("kind").get<std::string>();

    fs::path out = prepare_out_dir(common.out_dir);
    int t0 = t0_opt.value_or(0);
    double x0 = x0_opt.value_or(cfg.dam.x0);
    int n = n_opt.value_or(cfg.simulation.scenarios);
    std::uint64_t seed = seed_opt.value_or(cfg.simulation.seed);

    SimulateOptions sim_opts;
    sim_opts.threads = resolve_threads(cfg);
    sim_opts.probability_level = cfg.dam.target_level;

    json summary;
    if (kind == "extended") {
        ExtendedPolicy policy = load_extended_policy_csv(pdir / "policy.csv", inst);
        double z0 = z0_opt.value_or(inst.z0);
        auto sim = simulate_extended(inst.problem, policy, x0, z0, t0, n, seed, inst.noise,
                                     sim_opts);
        write_trajectories_csv(out / "trajectories.csv", sim.trajectories,
                               inst.problem.horizon.T, true);
        summary = {{"kind", "simulate"},
                   {"policy_kind", kind},
                   {"n", n},
                   {"seed", seed},
                   {"t0", t0},
                   {"x0", x0},
                   {"z0", z0},
                   {"mean_cost", sim.report.mean_cost},
                   {"cost_std_error", sim.report.cost_std_error},
                   {"constraint_mean", sim.report.constraint_mean},
                   {"probability", sim.report.probability.value_or(0.0)},
                   {"mean_z_final", sim.report.mean_z_final.value_or(0.0)},
                   {"v_stage_means", sim.report.v_stage_means},
                   {"max_v_mean_abs", sim.report.max_v_mean_abs}};
        std::cout << "simulate: mean cost " << fmt9(sim.report.mean_cost)
                  << ", probability " << fmt9(sim.report.probability.value_or(0.0)) << "\n";
    } else if (kind == "classic" || kind == "dual") {
        StatePolicy policy = load_state_policy_csv(pdir / "policy.csv", inst.x_grid,
                                                   inst.u_grid, 0, cfg.dam.horizon);
        auto sim = simulate_classic(inst.problem, policy, x0, t0, n, seed, inst.noise,
                                    sim_opts);
        write_trajectories_csv(out / "trajectories.csv", sim.trajectories,
                               inst.problem.horizon.T, false);
        summary = {{"kind", "simulate"},
                   {"policy_kind", kind},
                   {"n", n},
                   {"seed", seed},
                   {"t0", t0},
                   {"x0", x0},
                   {"mean_cost", sim.report.mean_cost},
                   {"cost_std_error", sim.report.cost_std_error},
                   {"constraint_mean", sim.report.constraint_mean},
                   {"probability", sim.report.probability.value_or(0.0)}};
        std::cout << "simulate: mean cost " << fmt9(sim.report.mean_cost)
                  << ", probability " << fmt9(sim.report.probability.value_or(0.0)) << "\n";
    } else {
        fail(ErrorCode::ConfigInvalid, "policy directory holds kind '" + kind + "'");
    }
    write_summary(out, summary);
    return 0;
}

int cmd_audit(const std::string& method, const std::string& policy_dir,
              const std::string& restart_spec, std::optional<double> level,
              const CommonArgs& common, std::optional<int> n_opt,
              std::optional<std::uint64_t> seed_opt) {
    fs::path pdir(policy_dir);
    AppConfig cfg = load_app_config(pdir / "config.json");
    if (common.threads >= 0) cfg.threads = common.threads;
    DamInstance inst = build_dam_problem(cfg.dam);
    RestartSpec restart = parse_restart(restart_spec);
    fs::path out = prepare_out_dir(common.out_dir);

    double required_probability = level.value_or(cfg.dam.probability_level);
    int n = n_opt.value_or(cfg.simulation.scenarios);
    std::uint64_t seed = seed_opt.value_or(cfg.simulation.seed);

    AuditVerdict verdict;
    if (method == "dual") {
        StatePolicy policy = load_state_policy_csv(pdir / "policy.csv", inst.x_grid,
                                                   inst.u_grid, 0, cfg.dam.horizon);
        DualAuditInput input{inst.problem,
                             inst.x_grid,
                             inst.u_grid,
                             inst.noise,
                             policy,
                             {-required_probability},
                             cfg.uzawa,
                             cfg.audit,
                             n,
                             seed,
                             cfg.dam.target_level,
                             resolve_threads(cfg)};
        verdict = audit_restart_dual(input, restart.t, restart.x);
    } else if (method == "extended") {
        ExtendedPolicy policy = load_extended_policy_csv(pdir / "policy.csv", inst);
        ExtendedValueTable table =
            load_extended_value_table_csv(pdir / "value_table.csv", inst);
        ExtendedAuditInput input{inst.problem, inst.noise,        table,
                                 policy,       cfg.audit,         n,
                                 seed,         cfg.dam.target_level, resolve_threads(cfg)};
        double z = restart.z.value_or(inst.z0);
        verdict = audit_restart_extended(input, restart.t, restart.x, z,
                                         std::vector<double>{-required_probability});
    } else {
        fail(ErrorCode::InvalidArgument, "--method must be dual or extended");
    }

    json summary = verdict_to_json(verdict);
    summary["kind"] = "audit";
    write_summary(out, summary);
    std::cout << "audit: " << method << " restart " << restart_spec << " -> "
              << (verdict.consistent ? "consistent" : "inconsistent")
              << " (probability " << fmt9(verdict.probability_mc) << ")\n";
    return 0;
}

int cmd_report_tables(const std::vector<std::string>& runs) {
    for (const auto& dir : runs) {
        json j = read_summary(dir);
        std::string kind = j.at("kind").get<std::string>();
        std::cout << "=== " << dir << " (" << kind << ") ===\n";
        if (kind == "dual") {
            std::cout << "  Bellman value at t=0: " << fmt9(j.at("dual_value").get<double>())
                      << "\n  lambda*: " << fmt9(j.at("lambda_star")[0].get<double>())
                      << "\n  Pushforward probability: "
                      << fmt9(j.at("pushforward_probability").get<double>())
                      << "\n  Converged: " << (j.at("converged").get<bool>() ? "yes" : "no")
                      << " in " << j.at("iterations").get<int>() << " iterations\n";
        } else if (kind == "extended") {
            std::cout << "  Bellman value at t=0: "
                      << fmt9(j.at("value_at_start").get<double>())
                      << "\n  Initial z0: " << fmt9(j.at("z0").get<double>()) << "\n";
        } else if (kind == "classic") {
            std::cout << "  Bellman value at t=0: "
                      << fmt9(j.at("value_at_start").get<double>()) << "\n";
        } else if (kind == "simulate") {
            std::cout << "  Monte Carlo cost: " << fmt9(j.at("mean_cost").get<double>())
                      << "\n  Estimated probability: "
                      << fmt9(j.at("probability").get<double>()) << "\n";
        } else if (kind == "audit") {
            std::cout << "  Method: " << j.at("method").get<std::string>()
                      << "\n  Monte Carlo cost: " << fmt9(j.at("mc_cost").get<double>())
                      << "\n  Estimated probability: "
                      << fmt9(j.at("probability_mc").get<double>()) << "\n  Verdict: "
                      << (j.at("consistent").get<bool>() ? "consistent" : "inconsistent")
                      << "\n";
        }
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Solvers for finite-horizon stochastic control with a final-time "
                 "expectation or probability constraint"};
    app.require_subcommand(1);

    CommonArgs common;
    std::optional<double> lambda, rho, tol, level;
    std::optional<int> max_iter, t0_opt, n_opt;
    std::optional<double> x0_opt, z0_opt;
    std::optional<std::uint64_t> seed_opt;
    std::string policy_dir, method, restart_spec;
    std::vector<std::string> runs;

    auto add_common = [&](CLI::App* sub, bool need_config, bool need_out) {
        auto* c = sub->add_option("--config", common.config_path, "configuration file");
        if (need_config) c->required();
        auto* o = sub->add_option("--out", common.out_dir, "output directory");
        if (need_out) o->required();
        sub->add_option("--threads", common.threads, "worker thread cap (0 = hardware)");
    };

    auto* sc = app.add_subcommand("solve-classic",
                                  "backward dynamic programming, optionally with a "
                                  "priced terminal constraint");
    add_common(sc, true, true);
    sc->add_option("--lambda", lambda, "multiplier for the terminal constraint term");

    auto* sd = app.add_subcommand("solve-dual", "Uzawa multiplier iteration");
    add_common(sd, true, true);
    sd->add_option("--rho", rho, "gradient step size");
    sd->add_option("--tol", tol, "gradient stopping tolerance");
    sd->add_option("--max-iter", max_iter, "iteration cap");

    auto* se = app.add_subcommand("solve-extended",
                                  "dynamic programming on the augmented (x, z) state");
    add_common(se, true, true);

    auto* sim = app.add_subcommand("simulate", "closed-loop Monte Carlo for a saved policy");
    add_common(sim, false, true);
    sim->add_option("--policy", policy_dir, "directory of a solve run")->required();
    sim->add_option("--t0", t0_opt, "restart stage");
    sim->add_option("--x0", x0_opt, "restart state");
    sim->add_option("--z0", z0_opt, "restart z (extended policies)");
    sim->add_option("--n", n_opt, "scenario count");
    sim->add_option("--seed", seed_opt, "root seed");

    auto* au = app.add_subcommand("audit", "time-consistency check of a saved policy");
    add_common(au, false, true);
    au->add_option("--method", method, "dual or extended")->required();
    au->add_option("--policy", policy_dir, "directory of a solve run")->required();
    au->add_option("--restart", restart_spec, "T,X or T,X,Z restart point")->required();
    au->add_option("--level", level, "required probability level");
    au->add_option("--n", n_opt, "scenario count");
    au->add_option("--seed", seed_opt, "root seed");

    auto* rt = app.add_subcommand("report-tables", "print key figures of saved runs");
    rt->add_option("--runs", runs, "run directories")->required()->expected(-1);

    std::vector<std::string> argv_copy(args);
    try {
        std::vector<char*> argv;
        argv.reserve(argv_copy.size() + 1);
        static char name[] = "msoc";
        argv.push_back(name);
        for (auto& a : argv_copy) argv.push_back(a.data());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        emit_error("ConfigInvalid", e.what());
        return 2;
    }

    try {
        if (sc->parsed()) return cmd_solve_classic(common, lambda);
        if (sd->parsed()) return cmd_solve_dual(common, rho, tol, max_iter);
        if (se->parsed()) return cmd_solve_extended(common);
        if (sim->parsed())
            return cmd_simulate(policy_dir, common, t0_opt, x0_opt, z0_opt, n_opt, seed_opt);
        if (au->parsed())
            return cmd_audit(method, policy_dir, restart_spec, level, common, n_opt,
                             seed_opt);
        if (rt->parsed()) return cmd_report_tables(runs);
    } catch (const Error& e) {
        emit_error(error_code_name(e.code()), e.what());
        return error_exit_code(e.code());
    } catch (const std::exception& e) {
        emit_error("Internal", e.what());
        return 1;
    }
    return 0;
}

} // namespace msoc
