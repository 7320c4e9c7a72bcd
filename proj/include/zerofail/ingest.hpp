#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zerofail/core.hpp"
#include "zerofail/sample.hpp"

namespace zerofail {

enum class ParseMode { Strict, Lenient };

enum class RowErrorKind { BadHeader, BadArity, NonNumeric, NonFinite, NegativeAge, DuplicateId, BadId, BadTag };

std::string_view to_string(RowErrorKind kind);

struct RowError {
    std::size_t line = 0;  // 1-based; the header is line 1
    RowErrorKind kind = RowErrorKind::BadArity;
    std::string message;
};

/// Thrown by the parsers when the input cannot be accepted. Carries every
/// row error found in the file, not just the first.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(std::vector<RowError> errors);
    const std::vector<RowError>& errors() const { return errors_; }

private:
    std::vector<RowError> errors_;
};

struct ParsedLog {
    Dataset samples;
    /// Input line of each sample, parallel to `samples`.
    std::vector<std::size_t> lines;
    /// Rows skipped in lenient mode.
    std::vector<RowError> skipped;
};

/// CSV with header `sample_id,actual_age,estimate[,tags]`; tags are
/// `;`-separated. Strict mode throws ParseError if any row is bad; lenient
/// mode drops bad rows and reports them in `skipped`. A bad header always throws.
ParsedLog parse_prediction_log(std::string_view text, ParseMode mode = ParseMode::Strict);

/// Writes the canonical CSV form: LF line endings, shortest round-trip
/// decimals, tags in sorted order. The tags column is emitted only when some
/// sample carries a tag.
std::string write_prediction_log(std::span<const Sample> samples);

struct RaterRow {
    std::string sample_id;
    double actual_age = 0.0;
    std::vector<double> estimates;
};

struct RaterFile {
    std::vector<RaterRow> rows;
    std::vector<std::size_t> lines;
    std::vector<RowError> skipped;
};

/// CSV with header `sample_id,actual_age,<rater columns...>`; rows may be
/// ragged but need at least one estimate.
RaterFile parse_rater_file(std::string_view text, ParseMode mode = ParseMode::Strict);

enum class AggregationPolicy { Mean, WorstCase };

/// One Sample per row: mean or maximum of the rater estimates, tagged
/// `raters=<count>`.
Dataset aggregate_raters(const RaterFile& file, AggregationPolicy policy);

struct LegalAgeSplit {
    std::vector<LabeledScore> positives;
    std::vector<LabeledScore> negatives;
};

/// Positive iff actual_age < legal_age.
LegalAgeSplit split_by_legal_age(std::span<const Sample> samples, double legal_age);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace zerofail
