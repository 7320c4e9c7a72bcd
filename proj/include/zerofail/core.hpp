#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zerofail {

/// Raised when a probability, count or set violates an operation's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A reliability claim (1 - p) to be demonstrated with the given confidence.
class ReliabilityTarget {
public:
    ReliabilityTarget(double confidence, double reliability);

    double confidence() const { return confidence_; }
    double reliability() const { return reliability_; }

private:
    double confidence_;
    double reliability_;
};

/// One scored subject. Positives are under the legal age; scores are
/// estimated ages (higher = older). `actual_age` is carried so that TNRs can
/// be restricted to hysteresis bands.
struct LabeledScore {
    std::string sample_id;
    bool is_positive = false;
    double score = 0.0;
    double actual_age = 0.0;
};

/// A subject raises an alarm (is treated as possibly under-age) iff
/// score <= threshold.
struct OperatingPoint {
    double threshold = 0.0;
    std::size_t k_allowed_failures = 0;
    std::string source_sample_id;

    bool raises_alarm(double score) const { return score <= threshold; }
};

struct TnrReport {
    double hysteresis_age = 0.0;
    std::size_t eligible_count = 0;
    std::size_t true_negative_count = 0;
    /// NaN when no negative reached the hysteresis age.
    double tnr = 0.0;

    bool empty() const { return eligible_count == 0; }
};

struct SampleSize {
    double exact = 0.0;
    std::uint64_t ceiling = 0;
};

/// N = ln(1 - confidence) / ln(reliability), with its ceiling.
SampleSize required_sample_size(const ReliabilityTarget& target);

/// Confidence demonstrated by n zero-failure trials: 1 - reliability^n.
double achieved_confidence(std::uint64_t n, double reliability);

/// Reliability demonstrated by n zero-failure trials: (1 - confidence)^(1/n).
double demonstrated_reliability(std::uint64_t n, double confidence);

/// Highest positive score; ties resolve to the smallest sample_id.
OperatingPoint zero_failure_threshold(std::span<const LabeledScore> positives);

/// (k+1)-th largest positive score, leaving exactly k positives above it.
/// When several samples share that score the smallest sample_id is reported.
OperatingPoint k_failure_threshold(std::span<const LabeledScore> positives, std::size_t k);

/// Fraction of negatives aged >= hysteresis_age whose score is strictly above
/// the operating threshold.
TnrReport tnr_at(std::span<const LabeledScore> negatives, const OperatingPoint& op,
                 double hysteresis_age);

}  // namespace zerofail
