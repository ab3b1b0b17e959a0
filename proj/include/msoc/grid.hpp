#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "msoc/errors.hpp"

namespace msoc {

/// Uniform grid lo, lo+step, ..., lo+(n-1)*step. Immutable after construction.
class ScalarGrid {
public:
    ScalarGrid() = default;

    ScalarGrid(double lo, double step, int n) : lo_(lo), step_(step), n_(n) {
        if (!(step > 0.0))
            fail(ErrorCode::InvalidArgument, "grid step must be positive");
        if (n < 1)
            fail(ErrorCode::InvalidArgument, "grid needs at least one point");
    }

    double lo() const { return lo_; }
    double step() const { return step_; }
    int size() const { return n_; }
    double hi() const { return point(n_ - 1); }

    double point(int i) const { return lo_ + static_cast<double>(i) * step_; }

    bool valid_index(int i) const { return i >= 0 && i < n_; }

    /// Index of the nearest grid point. Accepts values up to half a step
    /// beyond either end; anything farther is OutOfRange.
    int snap(double value) const {
        auto idx = try_snap(value);
        if (!idx)
            fail(ErrorCode::OutOfRange,
                 "value " + std::to_string(value) + " outside grid [" +
                     std::to_string(lo_) + ", " + std::to_string(hi()) + "]");
        return *idx;
    }

    std::optional<int> try_snap(double value) const {
        double rel = (value - lo_) / step_;
        if (rel < -0.5 - kSnapTol || rel > static_cast<double>(n_ - 1) + 0.5 + kSnapTol)
            return std::nullopt;
        long long i = std::llround(rel);
        if (i < 0) i = 0;
        if (i >= n_) i = n_ - 1;
        return static_cast<int>(i);
    }

    /// True when value coincides with a grid point within 1e-9 steps.
    bool on_grid(double value) const {
        double rel = (value - lo_) / step_;
        return std::abs(rel - std::round(rel)) <= kSnapTol &&
               std::round(rel) >= 0 && std::round(rel) <= n_ - 1;
    }

private:
    static constexpr double kSnapTol = 1e-9;

    double lo_ = 0.0;
    double step_ = 1.0;
    int n_ = 0;
};

/// Grid over [lo, hi] with the given step; (hi-lo) must be an integer
/// multiple of step within 1e-9 relative tolerance.
inline ScalarGrid make_uniform_grid(double lo, double hi, double step) {
    if (!(step > 0.0))
        fail(ErrorCode::InvalidArgument, "grid step must be positive");
    if (hi < lo)
        fail(ErrorCode::InvalidArgument, "grid upper bound below lower bound");
    double ratio = (hi - lo) / step;
    double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
        fail(ErrorCode::NonIntegralRange,
             "(hi - lo) is not an integer multiple of step");
    return ScalarGrid(lo, step, static_cast<int>(rounded) + 1);
}

/// Offset in whole steps of `base` represented by `value`; error if value is
/// not an integer multiple of the base step.
inline int step_multiple(double value, double base_step) {
    double rel = value / base_step;
    double rounded = std::round(rel);
    if (std::abs(rel - rounded) > 1e-9 * std::max(1.0, std::abs(rel)))
        fail(ErrorCode::ConfigInvalid, "value is not a whole number of grid steps");
    return static_cast<int>(rounded);
}

} // namespace msoc
