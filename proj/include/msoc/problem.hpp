#pragma once

#include <functional>
#include <vector>

#include "msoc/errors.hpp"

namespace msoc {

/// Decision stages t0, ..., T-1 with terminal stage T.
struct TimeHorizon {
    int t0 = 0;
    int T = 1;

    TimeHorizon() = default;
    TimeHorizon(int t0_, int T_) : t0(t0_), T(T_) {
        if (t0 < 0 || t0 >= T)
            fail(ErrorCode::InvalidArgument, "horizon requires 0 <= t0 < T");
    }

    int stages() const { return T - t0; }
};

using DynamicsFn = std::function<double(int t, double x, double u, double w)>;
using StageCostFn = std::function<double(int t, double x, double u, double w)>;
using TerminalCostFn = std::function<double(double x)>;
using ConstraintFn = std::function<std::vector<double>(double x)>;

/// Controlled stochastic system: dynamics f_t, running cost L_t, terminal
/// cost K and the final-state constraint map g with codomain dimension m.
struct ProblemDefinition {
    TimeHorizon horizon;
    DynamicsFn dynamics;
    StageCostFn stage_cost;
    TerminalCostFn terminal_cost;
    ConstraintFn constraint;
    int constraint_dim = 0;

    std::vector<double> g(double x) const {
        auto v = constraint(x);
        if (static_cast<int>(v.size()) != constraint_dim)
            fail(ErrorCode::InvalidArgument, "constraint map returned wrong dimension");
        return v;
    }
};

} // namespace msoc
