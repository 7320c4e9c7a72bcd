#include "zerofail/testsets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "zerofail/rng.hpp"

namespace zerofail {

namespace {

bool by_id(const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; }

Dataset sorted_unique(std::span<const Sample> samples, const char* what) {
    Dataset out(samples.begin(), samples.end());
    std::sort(out.begin(), out.end(), by_id);
    auto dup = std::adjacent_find(out.begin(), out.end(), [](const Sample& a, const Sample& b) {
        return a.sample_id == b.sample_id;
    });
    if (dup != out.end()) {
        throw DomainError(std::string("duplicate sample_id '") + dup->sample_id + "' in " + what);
    }
    return out;
}

void require_under_age(const Dataset& samples, double legal_age) {
    for (const auto& s : samples) {
        if (!(s.actual_age < legal_age)) {
            throw DomainError("sample '" + s.sample_id + "' (actual age " +
                              std::to_string(s.actual_age) + ") is not under the legal age");
        }
    }
}

/// Uniform subset of `from` of the given size, returned sorted by id.
Dataset draw_subset(const Dataset& from, std::size_t size, Rng& rng) {
    if (size == from.size()) {
        return from;
    }
    std::vector<std::size_t> index(from.size());
    std::iota(index.begin(), index.end(), 0);
    // Partial Fisher-Yates: the first `size` slots become the subset.
    for (std::size_t i = 0; i < size; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(from.size() - i));
        std::swap(index[i], index[j]);
    }
    index.resize(size);
    std::sort(index.begin(), index.end());
    Dataset out;
    out.reserve(size);
    for (auto i : index) {
        out.push_back(from[i]);
    }
    return out;
}

std::string format_years(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

std::string_view to_string(FlagKind kind) {
    switch (kind) {
        case FlagKind::ClericalSuspect:
            return "clerical_suspect";
        case FlagKind::HardExample:
            return "hard_example";
        case FlagKind::AttackSuspect:
            return "attack_suspect";
    }
    return "unknown";
}

TestHierarchy build_hierarchy(std::span<const Sample> positives, std::span<const std::size_t> sizes,
                              std::uint64_t seed, double legal_age) {
    if (sizes.empty()) {
        throw DomainError("at least one level size is required");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) {
            throw DomainError("level sizes must be positive");
        }
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            throw DomainError("level sizes must be strictly ascending");
        }
    }
    Dataset pool = sorted_unique(positives, "positive pool");
    if (sizes.back() > pool.size()) {
        throw DomainError("largest level size " + std::to_string(sizes.back()) +
                          " exceeds the positive pool of " + std::to_string(pool.size()));
    }
    require_under_age(pool, legal_age);

    TestHierarchy h;
    h.seed_ = seed;
    h.legal_age_ = legal_age;
    h.levels_.resize(sizes.size());
    Rng rng(seed, 0);
    const Dataset* parent = &pool;
    for (std::size_t i = sizes.size(); i-- > 0;) {
        h.levels_[i] = draw_subset(*parent, sizes[i], rng);
        parent = &h.levels_[i];
    }
    for (auto size : sizes) {
        h.names_.push_back("zFail-" + std::to_string(size));
    }
    return h;
}

TestHierarchy extend_with_attacks(std::span<const Sample> regular, std::span<const Sample> attacks,
                                  double legal_age) {
    if (attacks.empty()) {
        throw DomainError("attack set is empty; use build_hierarchy for a single level");
    }
    Dataset reg = sorted_unique(regular, "regular set");
    Dataset att = sorted_unique(attacks, "attack set");
    if (reg.empty()) {
        throw DomainError("regular set is empty");
    }
    for (const auto& a : att) {
        if (!a.has_tag(tags::kAttack)) {
            throw DomainError("sample '" + a.sample_id + "' in the attack set is not tagged attack");
        }
        if (std::binary_search(reg.begin(), reg.end(), a, by_id)) {
            throw DomainError("sample_id '" + a.sample_id + "' appears in both regular and attack sets");
        }
    }
    require_under_age(reg, legal_age);
    require_under_age(att, legal_age);

    Dataset both;
    both.reserve(reg.size() + att.size());
    std::merge(reg.begin(), reg.end(), att.begin(), att.end(), std::back_inserter(both), by_id);

    TestHierarchy h;
    h.legal_age_ = legal_age;
    h.levels_ = {std::move(reg), std::move(both)};
    h.names_ = {"S_reg", "S_reg+S_att"};
    return h;
}

std::vector<DiagnosticFlag> flag_clerical_suspects(std::span<const Sample> samples,
                                                   double gap_years) {
    if (!(gap_years > 0.0)) {
        throw DomainError("gap_years must be positive");
    }
    std::vector<DiagnosticFlag> flags;
    for (const auto& s : samples) {
        const double gap = std::fabs(s.estimate - s.actual_age);
        if (gap >= gap_years) {
            flags.push_back({s.sample_id, FlagKind::ClericalSuspect,
                             "estimate " + format_years(s.estimate) + " vs recorded age " +
                                 format_years(s.actual_age) + " (gap " + format_years(gap) + " >= " +
                                 format_years(gap_years) + ")",
                             gap});
        }
    }
    std::stable_sort(flags.begin(), flags.end(), [](const auto& a, const auto& b) {
        if (a.severity_score != b.severity_score) return a.severity_score > b.severity_score;
        return a.sample_id < b.sample_id;
    });
    return flags;
}

std::vector<DiagnosticFlag> hard_examples(std::span<const Sample> positives, double hysteresis_age,
                                          double legal_age) {
    if (!(hysteresis_age > legal_age)) {
        throw DomainError("hysteresis age must exceed the legal age");
    }
    std::vector<DiagnosticFlag> flags;
    for (const auto& s : positives) {
        if (!(s.actual_age < legal_age)) {
            throw DomainError("sample '" + s.sample_id + "' is not a positive");
        }
        if (s.estimate > hysteresis_age) {
            flags.push_back({s.sample_id, FlagKind::HardExample,
                             "estimate " + format_years(s.estimate) + " > " +
                                 format_years(hysteresis_age) + " (actual " +
                                 format_years(s.actual_age) + ")",
                             s.estimate});
        }
    }
    std::stable_sort(flags.begin(), flags.end(), [](const auto& a, const auto& b) {
        if (a.severity_score != b.severity_score) return a.severity_score > b.severity_score;
        return a.sample_id < b.sample_id;
    });
    return flags;
}

std::vector<DiagnosticFlag> attack_suspects(std::span<const Sample> samples) {
    std::vector<DiagnosticFlag> flags;
    for (const auto& s : samples) {
        if (s.has_tag(tags::kAttack)) {
            flags.push_back({s.sample_id, FlagKind::AttackSuspect,
                             "tagged attack; estimate " + format_years(s.estimate), s.estimate});
        }
    }
    return flags;
}

std::vector<LabeledScore> as_positive_scores(std::span<const Sample> level) {
    std::vector<LabeledScore> out;
    out.reserve(level.size());
    for (const auto& s : level) {
        out.push_back({s.sample_id, true, s.estimate, s.actual_age});
    }
    return out;
}

}  // namespace zerofail
