#include "zerofail/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "zerofail/rng.hpp"

namespace zerofail {

namespace {

constexpr std::uint64_t kPositiveStream = 1ULL << 32;
constexpr std::uint64_t kNegativeStream = 2ULL << 32;

void emit_cohort(Dataset& out, char prefix, int age, std::uint32_t count, std::uint64_t stream,
                 const SyntheticDesign& design) {
    Rng rng(design.seed, stream | static_cast<std::uint32_t>(age));
    char id[32];
    for (std::uint32_t i = 0; i < count; ++i) {
        std::snprintf(id, sizeof id, "%c%03d-%06u", prefix, age, i);
        Sample s;
        s.sample_id = id;
        s.actual_age = age;
        s.estimate = age + rng.normal(design.noise_mean, design.noise_sigma);
        s.tags.insert(std::string(tags::kRegular));
        out.push_back(std::move(s));
    }
}

}  // namespace

void SyntheticDesign::validate() const {
    auto check_range = [](const AgeRange& r, const char* what) {
        if (r.first < 0 || r.first > r.last || r.last > 999) {
            throw DomainError(std::string(what) + " age range must satisfy 0 <= first <= last <= 999");
        }
    };
    check_range(positive_ages, "positive");
    check_range(negative_ages, "negative");
    if (positive_ages.last >= negative_ages.first) {
        throw DomainError("positive age range must lie strictly below the negative range");
    }
    if (per_year_positive < 1 || per_year_negative < 1 || per_year_positive > 999999 ||
        per_year_negative > 999999) {
        throw DomainError("per-year counts must lie in 1..999999");
    }
    if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma) || !std::isfinite(noise_mean)) {
        throw DomainError("noise sigma must be positive and finite");
    }
}

std::size_t SyntheticDesign::positive_count() const {
    return static_cast<std::size_t>(positive_ages.years()) * per_year_positive;
}

std::size_t SyntheticDesign::negative_count() const {
    return static_cast<std::size_t>(negative_ages.years()) * per_year_negative;
}

Dataset generate(const SyntheticDesign& design) {
    design.validate();
    Dataset out;
    out.reserve(design.positive_count() + design.negative_count());
    for (int age = design.positive_ages.first; age <= design.positive_ages.last; ++age) {
        emit_cohort(out, 'p', age, design.per_year_positive, kPositiveStream, design);
    }
    for (int age = design.negative_ages.first; age <= design.negative_ages.last; ++age) {
        emit_cohort(out, 'n', age, design.per_year_negative, kNegativeStream, design);
    }
    return out;
}

std::vector<SyntheticDesign> table1_designs(std::uint64_t seed, double noise_sigma) {
    std::vector<SyntheticDesign> designs;
    std::uint64_t row = 0;
    for (std::uint32_t per_year : {10U, 100U, 250U}) {
        SyntheticDesign d;
        d.per_year_positive = per_year;
        d.noise_sigma = noise_sigma;
        d.seed = derive_seed(seed, row++);
        designs.push_back(d);
    }
    return designs;
}

std::vector<Table1Row> run_table1_experiment(std::span<const SyntheticDesign> designs,
                                             std::span<const double> hysteresis_ages) {
    std::vector<Table1Row> rows;
    rows.reserve(designs.size());
    for (const auto& design : designs) {
        const Dataset data = generate(design);
        std::vector<LabeledScore> positives;
        std::vector<LabeledScore> negatives;
        for (const auto& s : data) {
            const bool positive = s.actual_age <= design.positive_ages.last;
            (positive ? positives : negatives).push_back({s.sample_id, positive, s.estimate, s.actual_age});
        }
        Table1Row row;
        row.n = positives.size();
        row.operating_point = zero_failure_threshold(positives);
        for (double h : hysteresis_ages) {
            row.tnrs.push_back(tnr_at(negatives, row.operating_point, h));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double MonteCarloSummary::standard_error() const {
    if (trials == 0) return 0.0;
    return std::sqrt(bound * (1.0 - bound) / static_cast<double>(trials));
}

MonteCarloSummary monte_carlo_pass_rate(double p_true, std::uint64_t n, std::uint64_t trials,
                                        std::uint64_t seed) {
    if (!(p_true > 0.0 && p_true < 1.0)) {
        throw DomainError("p_true must lie in (0, 1)");
    }
    if (n == 0 || trials == 0) {
        throw DomainError("n and trials must be at least 1");
    }
    MonteCarloSummary summary;
    summary.trials = trials;
    summary.seed = seed;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng(seed, t);
        bool passed = true;
        for (std::uint64_t i = 0; i < n && passed; ++i) {
            passed = !(rng.uniform01() < p_true);
        }
        summary.pass_count += passed ? 1 : 0;
    }
    summary.empirical_pass_rate =
        static_cast<double>(summary.pass_count) / static_cast<double>(trials);
    summary.bound = std::exp(static_cast<double>(n) * std::log1p(-p_true));
    return summary;
}

}  // namespace zerofail
