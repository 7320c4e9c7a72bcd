#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zerofail/core.hpp"
#include "zerofail/synth.hpp"
#include "zerofail/testsets.hpp"

namespace zerofail {

inline constexpr std::string_view kSchemaVersion = "zerofail/1";

std::string_view tool_version();

struct CertificationResult {
    std::optional<ReliabilityTarget> target;
    /// Present iff `target` is.
    std::optional<SampleSize> required;
    std::optional<double> achieved_confidence;
    std::string positive_set_name;
    std::size_t positive_count = 0;
    std::size_t negative_count = 0;
    OperatingPoint operating_point;
    std::vector<TnrReport> tnr_reports;  // ascending hysteresis age
    std::vector<std::string> warnings;
    std::string dataset_fingerprint;
    std::string tool_version;
    std::string timestamp;
    std::optional<std::uint64_t> seed;

    bool has_shortfall() const { return required && positive_count < required->ceiling; }
};

/// Adjacent levels whose thresholds coincide, and the sample behind both.
struct SharedSource {
    std::size_t lower_level = 0;
    std::size_t upper_level = 0;
    std::string sample_id;
};

struct HierarchyResult {
    std::vector<CertificationResult> levels;
    std::vector<SharedSource> shared_sources;
    bool monotonicity_attestation = true;
    std::optional<std::uint64_t> seed;
};

struct CertifyOptions {
    std::string positive_set_name = "positives";
    std::optional<ReliabilityTarget> target;
    std::optional<std::uint64_t> seed;
    /// Empty means "now".
    std::string timestamp;
};

/// Zero-failure threshold on the positives, TNRs on the negatives at each
/// hysteresis age, plus provenance. With a target, also reports the required
/// and achieved figures and warns on a sample-size shortfall.
CertificationResult certify(std::span<const LabeledScore> positives,
                            std::span<const LabeledScore> negatives,
                            std::span<const double> hysteresis_ages,
                            const CertifyOptions& options = {});

/// Certifies every level. When two adjacent levels share a threshold the
/// larger level reports the smaller level's source sample, which is then an
/// arg-max of both.
HierarchyResult certify_hierarchy(const TestHierarchy& hierarchy,
                                  std::span<const LabeledScore> negatives,
                                  std::span<const double> hysteresis_ages,
                                  const CertifyOptions& options = {});

/// Thresholds non-decreasing and every TNR column non-increasing.
bool attest_monotonicity(std::span<const CertificationResult> levels);

struct Table1Report {
    std::vector<Table1Row> rows;
    std::vector<double> hysteresis_ages;
    /// Optional (confidence, reliability) label per row.
    std::vector<std::optional<ReliabilityTarget>> targets;
    std::uint64_t seed = 0;
    double noise_sigma = 3.0;
};

/// Runs the three-row synthetic experiment, labelled with its design targets.
Table1Report table1_replica(std::uint64_t seed, std::span<const double> hysteresis_ages,
                            double noise_sigma = 3.0);

enum class Format { Json, Markdown, Csv };

std::optional<Format> parse_format(std::string_view name);

std::string render(const CertificationResult& result, Format format);
std::string render(const HierarchyResult& result, Format format);
std::string render(const Table1Report& report, Format format);

/// Inverses of the JSON renderings. Throw std::invalid_argument on schema mismatch.
CertificationResult parse_certification_json(std::string_view text);
HierarchyResult parse_hierarchy_json(std::string_view text);

/// SHA-256 (hex) of the canonical CSV of the scored samples, sorted by id.
std::string dataset_fingerprint(std::span<const LabeledScore> positives,
                                std::span<const LabeledScore> negatives);

/// Current UTC time as `YYYY-MM-DDTHH:MM:SS+00:00`.
std::string utc_timestamp();

}  // namespace zerofail
