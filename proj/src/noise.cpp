#include "msoc/noise.hpp"

#include <cmath>
#include <numeric>

#include "msoc/errors.hpp"

namespace msoc {

std::optional<RationalWeights> detect_rational_weights(const std::vector<double>& probs) {
    constexpr std::uint64_t kMaxDen = 4096;
    for (double p : probs)
        if (!(p > 0.0)) return std::nullopt;
    for (std::uint64_t d = 1; d <= kMaxDen; ++d) {
        std::vector<std::uint64_t> num(probs.size());
        std::uint64_t total = 0;
        bool ok = true;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            double scaled = probs[j] * static_cast<double>(d);
            double rounded = std::round(scaled);
            if (rounded < 1.0 || std::abs(scaled - rounded) > 1e-9) {
                ok = false;
                break;
            }
            num[j] = static_cast<std::uint64_t>(rounded);
            total += num[j];
        }
        if (ok && total == d)
            return RationalWeights{d, std::move(num)};
    }
    return std::nullopt;
}

// Structural checks only; normalization and positivity are the job of
// validate_noise_model so that defective inputs remain representable.
NoiseStage::NoiseStage(std::vector<NoiseAtom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty())
        fail(ErrorCode::InvalidArgument, "noise stage needs at least one atom");
    for (std::size_t j = 0; j < atoms_.size(); ++j) {
        if (!std::isfinite(atoms_[j].prob) || atoms_[j].prob < 0.0)
            fail(ErrorCode::InvalidArgument, "atom probability must be finite and non-negative");
        if (j > 0 && !(atoms_[j].value > atoms_[j - 1].value))
            fail(ErrorCode::InvalidArgument, "atom values must be strictly increasing");
    }
    cum_.resize(atoms_.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < atoms_.size(); ++j) {
        acc += atoms_[j].prob;
        cum_[j] = acc;
    }
    std::vector<double> probs(atoms_.size());
    for (std::size_t j = 0; j < atoms_.size(); ++j) probs[j] = atoms_[j].prob;
    rational_ = detect_rational_weights(probs);
}

int NoiseStage::sample_index(double u) const {
    for (std::size_t j = 0; j + 1 < cum_.size(); ++j)
        if (u < cum_[j]) return static_cast<int>(j);
    return static_cast<int>(cum_.size()) - 1;
}

NoiseValidation validate_noise_model(const NoiseModel& model) {
    NoiseValidation report;
    for (int t = 0; t < model.stage_count(); ++t) {
        const NoiseStage& stage = model.stage(t);
        double sum = 0.0;
        for (int j = 0; j < stage.size(); ++j) {
            double p = stage.prob(j);
            if (!(p > 0.0)) {
                report.ok = false;
                report.issues.push_back({t, "non-positive probability at atom " + std::to_string(j)});
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            report.ok = false;
            report.issues.push_back({t, "probabilities sum to " + std::to_string(sum)});
        }
    }
    return report;
}

NoiseStage make_uniform_noise(const ScalarGrid& grid) {
    std::vector<NoiseAtom> atoms(grid.size());
    double p = 1.0 / static_cast<double>(grid.size());
    for (int i = 0; i < grid.size(); ++i) atoms[i] = {grid.point(i), p};
    return NoiseStage(std::move(atoms));
}

NoiseStage make_noise_stage(std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size())
        fail(ErrorCode::InvalidArgument, "values/probs size mismatch");
    std::vector<NoiseAtom> atoms(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) atoms[j] = {values[j], probs[j]};
    return NoiseStage(std::move(atoms));
}

} // namespace msoc
