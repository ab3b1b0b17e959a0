#include "msoc/uzawa.hpp"

#include <cmath>

#include "msoc/simulate.hpp"

namespace msoc {

EverettCertificate everett_certificate(const std::vector<double>& lambda,
                                       const std::vector<double>& b_bar,
                                       const std::vector<double>& b, double tol) {
    if (lambda.size() != b_bar.size() || lambda.size() != b.size())
        fail(ErrorCode::InvalidArgument, "certificate vectors must share a dimension");
    EverettCertificate cert;
    cert.lambda = lambda;
    cert.b_bar = b_bar;
    cert.b = b;
    cert.tol = tol;
    cert.member = true;
    cert.slack.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (lambda[i] < 0.0)
            fail(ErrorCode::InvalidArgument, "multiplier must be non-negative");
        cert.slack[i] = b[i] - b_bar[i];
        if (lambda[i] > 0.0) {
            if (std::abs(cert.slack[i]) > tol) cert.member = false;
        } else {
            if (cert.slack[i] < -tol) cert.member = false;
        }
    }
    return cert;
}

DualFunctionResult dual_function(const std::vector<double>& lambda,
                                 const ProblemDefinition& problem, const ScalarGrid& x_grid,
                                 const ScalarGrid& u_grid, const NoiseModel& noise,
                                 const std::vector<double>& b, double x0,
                                 const ClassicSolveOptions& options) {
    if (static_cast<int>(lambda.size()) != problem.constraint_dim ||
        lambda.size() != b.size())
        fail(ErrorCode::InvalidArgument, "multiplier dimension mismatch");
    for (double l : lambda)
        if (l < 0.0) fail(ErrorCode::InvalidArgument, "multiplier must be non-negative");

    TerminalValueFn priced_terminal = [&problem, lambda](double x) -> ExtendedReal {
        double k = problem.terminal_cost(x);
        auto gx = problem.constraint(x);
        for (std::size_t i = 0; i < lambda.size(); ++i) k += lambda[i] * gx[i];
        return ExtendedReal(k);
    };

    DualFunctionResult out;
    auto [table, policy] = solve_classic(problem, x_grid, u_grid, noise, priced_terminal,
                                         options);
    out.table = std::move(table);
    out.policy = std::move(policy);

    auto push = pushforward_value(problem, out.policy, x0, problem.horizon.t0, noise);
    out.b_bar = constraint_from_distribution(push.final_distribution, problem.constraint,
                                             problem.constraint_dim);

    double shift = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) shift += lambda[i] * b[i];
    out.value = out.table.value(problem.horizon.t0, x_grid.snap(x0)).raw() - shift;
    return out;
}

UzawaResult uzawa_solve(const ProblemDefinition& problem, const ScalarGrid& x_grid,
                        const ScalarGrid& u_grid, const NoiseModel& noise,
                        const std::vector<double>& b, double x0, const UzawaConfig& cfg,
                        const ClassicSolveOptions& options) {
    if (!(cfg.rho > 0.0)) fail(ErrorCode::ConfigInvalid, "uzawa step must be positive");
    if (cfg.tolerance < 0.0) fail(ErrorCode::ConfigInvalid, "uzawa tolerance must be >= 0");
    if (cfg.max_iterations < 1)
        fail(ErrorCode::ConfigInvalid, "uzawa needs at least one iteration");

    const std::size_t m = static_cast<std::size_t>(problem.constraint_dim);
    std::vector<double> lambda = cfg.lambda0.empty() ? std::vector<double>(m, 0.0)
                                                     : cfg.lambda0;
    if (lambda.size() != m)
        fail(ErrorCode::ConfigInvalid, "lambda0 dimension mismatch");
    for (double l : lambda)
        if (l < 0.0) fail(ErrorCode::ConfigInvalid, "lambda0 must be non-negative");

    UzawaResult result;
    for (int k = 0; k < cfg.max_iterations; ++k) {
        DualFunctionResult eval = dual_function(lambda, problem, x_grid, u_grid, noise, b,
                                                x0, options);
        std::vector<double> gradient(m);
        for (std::size_t i = 0; i < m; ++i) gradient[i] = eval.b_bar[i] - b[i];

        result.history.iterates.push_back({k, lambda, eval.value, eval.b_bar, gradient});
        result.lambda = lambda;
        result.dual_value = eval.value;
        result.b_bar = eval.b_bar;
        result.policy = std::move(eval.policy);
        result.table = std::move(eval.table);
        result.iterations = k + 1;

        bool converged = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (lambda[i] > 0.0) {
                if (std::abs(gradient[i]) > cfg.tolerance) converged = false;
            } else {
                if (gradient[i] > cfg.tolerance) converged = false;
            }
        }
        if (converged) {
            result.converged = true;
            break;
        }

        double step = cfg.diminishing ? cfg.rho / std::sqrt(static_cast<double>(k + 1))
                                      : cfg.rho;
        for (std::size_t i = 0; i < m; ++i)
            lambda[i] = std::max(0.0, lambda[i] + step * gradient[i]);
    }

    result.certificate =
        everett_certificate(result.lambda, result.b_bar, b, cfg.certificate_tol);
    return result;
}

} // namespace msoc
