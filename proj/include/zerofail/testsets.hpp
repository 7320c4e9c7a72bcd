#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zerofail/core.hpp"
#include "zerofail/sample.hpp"

namespace zerofail {

/// Chain of positive test sets S_1 ⊂ S_2 ⊂ ... ⊂ S_m, each level sorted by
/// sample_id. Only constructible through build_hierarchy / extend_with_attacks.
class TestHierarchy {
public:
    const std::vector<Dataset>& levels() const { return levels_; }
    std::size_t size() const { return levels_.size(); }
    const Dataset& level(std::size_t i) const { return levels_.at(i); }
    std::uint64_t seed() const { return seed_; }
    double legal_age() const { return legal_age_; }
    /// Display names, e.g. "zFail-60" or "S_reg".
    const std::vector<std::string>& names() const { return names_; }

private:
    friend TestHierarchy build_hierarchy(std::span<const Sample>, std::span<const std::size_t>,
                                         std::uint64_t, double);
    friend TestHierarchy extend_with_attacks(std::span<const Sample>, std::span<const Sample>,
                                             double);

    std::vector<Dataset> levels_;
    std::vector<std::string> names_;
    std::uint64_t seed_ = 0;
    double legal_age_ = 18.0;
};

enum class FlagKind { ClericalSuspect, HardExample, AttackSuspect };

std::string_view to_string(FlagKind kind);

struct DiagnosticFlag {
    std::string sample_id;
    FlagKind kind = FlagKind::ClericalSuspect;
    std::string detail;
    double severity_score = 0.0;
};

inline constexpr double kDefaultClericalGapYears = 20.0;

/// Nested uniform subsets of `positives`: the largest level is drawn from the
/// pool first, then every smaller level from the next larger one. Input order
/// is irrelevant; samples are normalized by sample_id before sampling.
TestHierarchy build_hierarchy(std::span<const Sample> positives, std::span<const std::size_t> sizes,
                              std::uint64_t seed, double legal_age = 18.0);

/// Two-level hierarchy [regular, regular ∪ attacks].
TestHierarchy extend_with_attacks(std::span<const Sample> regular, std::span<const Sample> attacks,
                                  double legal_age = 18.0);

/// Samples whose |estimate - actual_age| >= gap_years, most severe first.
std::vector<DiagnosticFlag> flag_clerical_suspects(std::span<const Sample> samples,
                                                   double gap_years = kDefaultClericalGapYears);

/// Positives estimated above the hysteresis age, highest estimate first.
std::vector<DiagnosticFlag> hard_examples(std::span<const Sample> positives, double hysteresis_age,
                                          double legal_age = 18.0);

/// Curator-tagged attack samples, listed for review.
std::vector<DiagnosticFlag> attack_suspects(std::span<const Sample> samples);

/// Positive LabeledScores for one hierarchy level.
std::vector<LabeledScore> as_positive_scores(std::span<const Sample> level);

}  // namespace zerofail
