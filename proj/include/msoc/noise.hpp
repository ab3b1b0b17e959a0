#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msoc/grid.hpp"

namespace msoc {

struct NoiseAtom {
    double value = 0.0;
    double prob = 0.0;
};

/// Exact rational view of a finite distribution: prob_j == num[j] / den.
/// Available when every probability is a small-denominator rational; lets the
/// martingale arithmetic run on integers instead of floats.
struct RationalWeights {
    std::uint64_t den = 0;
    std::vector<std::uint64_t> num;
};

/// Finite distribution of one stage noise. Atom values strictly increasing,
/// probabilities positive and summing to one.
class NoiseStage {
public:
    NoiseStage() = default;
    explicit NoiseStage(std::vector<NoiseAtom> atoms);

    int size() const { return static_cast<int>(atoms_.size()); }
    const NoiseAtom& atom(int j) const { return atoms_[j]; }
    const std::vector<NoiseAtom>& atoms() const { return atoms_; }

    double value(int j) const { return atoms_[j].value; }
    double prob(int j) const { return atoms_[j].prob; }

    const std::optional<RationalWeights>& rational() const { return rational_; }

    /// Inverse-CDF sample for u in [0,1).
    int sample_index(double u) const;

private:
    std::vector<NoiseAtom> atoms_;
    std::vector<double> cum_;
    std::optional<RationalWeights> rational_;
};

/// Stagewise-independent noise process: stage(t) is the distribution of the
/// disturbance revealed between decision stage t and t+1.
class NoiseModel {
public:
    NoiseModel() = default;
    explicit NoiseModel(std::vector<NoiseStage> stages) : stages_(std::move(stages)) {}

    int stage_count() const { return static_cast<int>(stages_.size()); }
    const NoiseStage& stage(int t) const { return stages_[t]; }
    const std::vector<NoiseStage>& stages() const { return stages_; }

private:
    std::vector<NoiseStage> stages_;
};

struct NoiseValidation {
    struct Issue {
        int stage = 0;
        std::string what;
    };
    bool ok = true;
    std::vector<Issue> issues;
};

/// Checks positivity and normalization (1e-12) of every stage.
NoiseValidation validate_noise_model(const NoiseModel& model);

/// Smallest common denominator d <= 4096 with probs[j] ~= n_j/d and
/// sum(n_j) == d, or nullopt when none exists.
std::optional<RationalWeights> detect_rational_weights(const std::vector<double>& probs);

/// Uniform distribution over the points of a grid.
NoiseStage make_uniform_noise(const ScalarGrid& grid);

NoiseStage make_noise_stage(std::vector<double> values, std::vector<double> probs);

} // namespace msoc
