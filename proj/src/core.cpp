#include "zerofail/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace zerofail {

namespace {

bool is_open_probability(double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; }

void require_probability(double x, const char* name) {
    if (!is_open_probability(x)) {
        throw DomainError(std::string(name) + " must lie in (0, 1), got " + std::to_string(x));
    }
}

void require_positives(std::span<const LabeledScore> positives) {
    if (positives.empty()) {
        throw DomainError("positive set is empty");
    }
    for (const auto& s : positives) {
        if (!s.is_positive) {
            throw DomainError("sample '" + s.sample_id + "' is not a positive");
        }
        if (!std::isfinite(s.score)) {
            throw DomainError("sample '" + s.sample_id + "' has a non-finite score");
        }
    }
}

}  // namespace

ReliabilityTarget::ReliabilityTarget(double confidence, double reliability)
    : confidence_(confidence), reliability_(reliability) {
    require_probability(confidence, "confidence");
    require_probability(reliability, "reliability");
}

SampleSize required_sample_size(const ReliabilityTarget& target) {
    // log1p keeps precision when confidence is tiny.
    const double exact = std::log1p(-target.confidence()) / std::log(target.reliability());
    return {exact, static_cast<std::uint64_t>(std::ceil(exact))};
}

double achieved_confidence(std::uint64_t n, double reliability) {
    if (n == 0) {
        throw DomainError("n must be at least 1");
    }
    require_probability(reliability, "reliability");
    // 1 - r^n, evaluated as -expm1(n ln r) to survive r close to 1.
    return -std::expm1(static_cast<double>(n) * std::log(reliability));
}

double demonstrated_reliability(std::uint64_t n, double confidence) {
    if (n == 0) {
        throw DomainError("n must be at least 1");
    }
    require_probability(confidence, "confidence");
    return std::exp(std::log1p(-confidence) / static_cast<double>(n));
}

OperatingPoint zero_failure_threshold(std::span<const LabeledScore> positives) {
    return k_failure_threshold(positives, 0);
}

OperatingPoint k_failure_threshold(std::span<const LabeledScore> positives, std::size_t k) {
    require_positives(positives);
    if (k >= positives.size()) {
        throw DomainError("k = " + std::to_string(k) + " must be smaller than the positive count " +
                          std::to_string(positives.size()));
    }

    std::vector<double> scores;
    scores.reserve(positives.size());
    for (const auto& s : positives) {
        scores.push_back(s.score);
    }
    auto nth = scores.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(scores.begin(), nth, scores.end(), std::greater<>{});
    const double threshold = *nth;

    const LabeledScore* source = nullptr;
    for (const auto& s : positives) {
        if (s.score == threshold && (source == nullptr || s.sample_id < source->sample_id)) {
            source = &s;
        }
    }
    return {threshold, k, source->sample_id};
}

TnrReport tnr_at(std::span<const LabeledScore> negatives, const OperatingPoint& op,
                 double hysteresis_age) {
    TnrReport report;
    report.hysteresis_age = hysteresis_age;
    for (const auto& s : negatives) {
        if (s.is_positive) {
            throw DomainError("sample '" + s.sample_id + "' is a positive in a negative set");
        }
        if (s.actual_age < hysteresis_age) {
            continue;
        }
        ++report.eligible_count;
        if (!op.raises_alarm(s.score)) {
            ++report.true_negative_count;
        }
    }
    report.tnr = report.eligible_count == 0
                     ? std::numeric_limits<double>::quiet_NaN()
                     : static_cast<double>(report.true_negative_count) /
                           static_cast<double>(report.eligible_count);
    return report;
}

}  // namespace zerofail
