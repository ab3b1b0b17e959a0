#include "msoc/dam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msoc {

double heaviside(double y) { return y >= 0.0 ? 1.0 : 0.0; }

double dam_turbinate(double x, double u, double w, double x_min) {
    return std::min(u, x + w - x_min);
}

double dam_dynamics(double x, double u, double w, double x_min, double x_max) {
    return std::min(x_max, std::max(x_min, x - u + w));
}

double dam_stage_cost(int t, double x, double u, double w, const std::vector<double>& prices,
                      double x_min) {
    return -prices[t] * dam_turbinate(x, u, w, x_min);
}

DamInstance build_dam_problem(const DamConfig& config) {
    std::vector<std::string> problems;
    if (config.horizon < 1) problems.push_back("horizon must be positive");
    if (!(config.x_min <= config.x0 && config.x0 <= config.x_max))
        problems.push_back("initial volume outside the volume bounds");
    if (static_cast<int>(config.prices.size()) != config.horizon)
        problems.push_back("price sequence length must equal the horizon");
    if (!(config.dx > 0 && config.du > 0 && config.dw > 0 && config.dz > 0 && config.dv > 0))
        problems.push_back("all discretization steps must be positive");
    if (!(config.probability_level >= 0.0 && config.probability_level <= 1.0))
        problems.push_back("probability level must lie in [0, 1]");
    // Commensurate steps keep every reachable state exactly on the x grid.
    auto multiple_of = [](double a, double b) {
        double r = a / b;
        return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
    };
    if (!problems.empty() || !multiple_of(config.du, config.dx) ||
        !multiple_of(config.dw, config.dx)) {
        if (problems.empty())
            problems.push_back("control/noise steps must be integer multiples of dx");
        std::string msg = "invalid dam configuration:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorCode::ConfigInvalid, msg);
    }

    DamInstance inst;
    inst.config = config;
    inst.x_grid = make_uniform_grid(config.x_min, config.x_max, config.dx);
    inst.u_grid = make_uniform_grid(config.u_min, config.u_max, config.du);
    inst.w_grid = make_uniform_grid(config.w_min, config.w_max, config.dw);

    inst.z0 = -config.probability_level;
    inst.b = {inst.z0};
    inst.z_grid = make_uniform_grid(inst.z0 - 1.0, inst.z0 + 1.0, config.dz);
    inst.v_grid = make_uniform_grid(-1.0, 1.0, config.dv);

    std::vector<NoiseStage> stages(config.horizon, make_uniform_noise(inst.w_grid));
    inst.noise = NoiseModel(std::move(stages));

    const double x_min = config.x_min;
    const double x_max = config.x_max;
    const double level = config.target_level;
    const std::vector<double> prices = config.prices;

    inst.problem.horizon = TimeHorizon(0, config.horizon);
    inst.problem.dynamics = [x_min, x_max](int, double x, double u, double w) {
        return dam_dynamics(x, u, w, x_min, x_max);
    };
    inst.problem.stage_cost = [prices, x_min](int t, double x, double u, double w) {
        return dam_stage_cost(t, x, u, w, prices, x_min);
    };
    inst.problem.terminal_cost = [](double) { return 0.0; };
    inst.problem.constraint = [level](double x) {
        return std::vector<double>{-heaviside(x - level)};
    };
    inst.problem.constraint_dim = 1;
    return inst;
}

} // namespace msoc
