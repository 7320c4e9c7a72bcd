#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zerofail/core.hpp"
#include "zerofail/sample.hpp"

namespace zerofail {

struct AgeRange {
    int first = 0;
    int last = 0;  // inclusive

    int years() const { return last - first + 1; }
};

/// Integer-age cohorts with Gaussian estimation noise.
struct SyntheticDesign {
    AgeRange positive_ages{12, 17};
    AgeRange negative_ages{18, 50};
    std::uint32_t per_year_positive = 10;
    std::uint32_t per_year_negative = 100;
    double noise_sigma = 3.0;
    double noise_mean = 0.0;
    std::uint64_t seed = 0;

    /// Throws DomainError when the design is invalid.
    void validate() const;
    std::size_t positive_count() const;
    std::size_t negative_count() const;
};

/// Every cohort (one age in one range) draws from its own sub-stream of the
/// design seed, so changing one cohort's size never perturbs another's draws.
/// Positive ids are `p<age>-<index>`, negative ids `n<age>-<index>`, both
/// zero-padded so that id order equals generation order.
Dataset generate(const SyntheticDesign& design);

struct Table1Row {
    std::size_t n = 0;
    OperatingPoint operating_point;
    std::vector<TnrReport> tnrs;  // one per hysteresis age, in input order
};

/// The three synthetic designs: 10, 100 and 250 positives per
/// year (N = 60, 600, 1500), 100 negatives per year over 18..50. Each row gets
/// its own seed derived from `seed`.
std::vector<SyntheticDesign> table1_designs(std::uint64_t seed, double noise_sigma = 3.0);

/// For each design: generate, set the zero-failure threshold on the
/// positives, and measure TNR at every hysteresis age on the negatives.
std::vector<Table1Row> run_table1_experiment(std::span<const SyntheticDesign> designs,
                                             std::span<const double> hysteresis_ages);

struct MonteCarloSummary {
    std::uint64_t trials = 0;
    std::uint64_t pass_count = 0;
    double empirical_pass_rate = 0.0;
    double bound = 0.0;  // (1 - p)^n
    std::uint64_t seed = 0;

    double standard_error() const;
};

/// Simulates `trials` campaigns of n Bernoulli(p_true) failure draws; a
/// campaign passes when it sees no failure. Trial t uses sub-stream t.
MonteCarloSummary monte_carlo_pass_rate(double p_true, std::uint64_t n, std::uint64_t trials,
                                        std::uint64_t seed);

}  // namespace zerofail
