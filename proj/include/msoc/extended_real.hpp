#pragma once

#include <cassert>
#include <cmath>
#include <limits>

namespace msoc {

/// Cost value on the extended real line [c, +inf]. Plus-infinity marks an
/// infeasible continuation; minus-infinity and NaN are never representable.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;

    ExtendedReal(double v) : v_(v) {
        assert(!std::isnan(v));
        assert(v != -std::numeric_limits<double>::infinity());
    }

    static ExtendedReal infinity() {
        return ExtendedReal(std::numeric_limits<double>::infinity());
    }

    bool is_finite() const { return std::isfinite(v_); }
    bool is_infinite() const { return !std::isfinite(v_); }

    /// Underlying double; +inf when infinite.
    double raw() const { return v_; }

    /// Finite value; caller must have checked is_finite().
    double value() const {
        assert(is_finite());
        return v_;
    }

    friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
        return ExtendedReal(a.v_ + b.v_);
    }
    ExtendedReal& operator+=(ExtendedReal o) {
        v_ += o.v_;
        return *this;
    }
    /// Scaling by a probability weight; p must be positive so that
    /// p * inf = inf and no 0 * inf indeterminate form can arise.
    friend ExtendedReal operator*(double p, ExtendedReal a) {
        assert(p > 0.0);
        return ExtendedReal(p * a.v_);
    }

    friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }
    friend bool operator!=(ExtendedReal a, ExtendedReal b) { return a.v_ != b.v_; }
    friend bool operator<(ExtendedReal a, ExtendedReal b) { return a.v_ < b.v_; }
    friend bool operator<=(ExtendedReal a, ExtendedReal b) { return a.v_ <= b.v_; }
    friend bool operator>(ExtendedReal a, ExtendedReal b) { return a.v_ > b.v_; }
    friend bool operator>=(ExtendedReal a, ExtendedReal b) { return a.v_ >= b.v_; }

private:
    double v_ = 0.0;
};

inline ExtendedReal min(ExtendedReal a, ExtendedReal b) { return a < b ? a : b; }

} // namespace msoc
