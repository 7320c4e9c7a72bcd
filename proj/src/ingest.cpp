#include "zerofail/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace zerofail {

namespace {

constexpr std::string_view kUtf8Bom = "\xEF\xBB\xBF";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(s.substr(start)));
            return out;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
}

struct Line {
    std::size_t number;
    std::string_view text;
};

/// Non-blank lines with their 1-based numbers; accepts LF and CRLF.
std::vector<Line> split_lines(std::string_view text) {
    if (text.starts_with(kUtf8Bom)) text.remove_prefix(kUtf8Bom.size());
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (line.ends_with('\r')) line.remove_suffix(1);
        ++number;
        if (!trim(line).empty()) lines.push_back({number, line});
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

bool valid_id(std::string_view id) {
    return !id.empty() && id.find_first_of("\",;\r\n") == std::string_view::npos;
}

struct FieldResult {
    double value = 0.0;
    bool ok = false;
};

/// Parses a finite double, recording a row error on failure.
FieldResult parse_number(std::string_view field, std::string_view name, std::size_t line,
                         std::vector<RowError>& errors) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec == std::errc::invalid_argument || ptr != last) {
        errors.push_back({line, RowErrorKind::NonNumeric,
                          std::string(name) + " is not a number: '" + std::string(field) + "'"});
        return {};
    }
    if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
        errors.push_back({line, RowErrorKind::NonFinite,
                          std::string(name) + " is not finite: '" + std::string(field) + "'"});
        return {};
    }
    return {value, true};
}

bool parse_age(std::string_view field, std::size_t line, std::vector<RowError>& errors,
               double& out) {
    const auto age = parse_number(field, "actual_age", line, errors);
    if (!age.ok) return false;
    if (age.value < 0.0) {
        errors.push_back({line, RowErrorKind::NegativeAge,
                          "actual_age is negative: " + std::string(field)});
        return false;
    }
    out = age.value;
    return true;
}

bool parse_id(std::string_view field, std::size_t line, std::vector<RowError>& errors) {
    if (!valid_id(field)) {
        errors.push_back({line, RowErrorKind::BadId, "invalid sample_id '" + std::string(field) + "'"});
        return false;
    }
    return true;
}

/// Tracks first occurrence of each id for duplicate reporting.
class IdRegistry {
public:
    bool claim(std::string_view id, std::size_t line, std::vector<RowError>& errors) {
        auto [it, inserted] = first_line_.try_emplace(std::string(id), line);
        if (!inserted) {
            errors.push_back({line, RowErrorKind::DuplicateId,
                              "duplicate sample_id '" + std::string(id) + "' at lines " +
                                  std::to_string(it->second) + " and " + std::to_string(line)});
        }
        return inserted;
    }

private:
    std::unordered_map<std::string, std::size_t> first_line_;
};

void finish(ParseMode mode, std::vector<RowError>& errors, std::vector<RowError>& skipped) {
    if (errors.empty()) return;
    if (mode == ParseMode::Strict) throw ParseError(std::move(errors));
    skipped = std::move(errors);
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

}  // namespace

std::string_view to_string(RowErrorKind kind) {
    switch (kind) {
        case RowErrorKind::BadHeader: return "bad_header";
        case RowErrorKind::BadArity: return "bad_arity";
        case RowErrorKind::NonNumeric: return "non_numeric";
        case RowErrorKind::NonFinite: return "non_finite";
        case RowErrorKind::NegativeAge: return "negative_age";
        case RowErrorKind::DuplicateId: return "duplicate_id";
        case RowErrorKind::BadId: return "bad_id";
        case RowErrorKind::BadTag: return "bad_tag";
    }
    return "unknown";
}

namespace {

std::string summarize(const std::vector<RowError>& errors) {
    std::ostringstream os;
    os << errors.size() << " row error(s)";
    for (const auto& e : errors) {
        os << "\n  line " << e.line << ": " << e.message;
    }
    return os.str();
}

}  // namespace

ParseError::ParseError(std::vector<RowError> errors)
    : std::runtime_error(summarize(errors)), errors_(std::move(errors)) {}

ParsedLog parse_prediction_log(std::string_view text, ParseMode mode) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw ParseError({{1, RowErrorKind::BadHeader, "missing header"}});
    }
    const auto header = split(lines.front().text, ',');
    const bool has_tags = header.size() == 4 && header[3] == "tags";
    if (header.size() < 3 || header.size() > 4 || header[0] != "sample_id" ||
        header[1] != "actual_age" || header[2] != "estimate" || (header.size() == 4 && !has_tags)) {
        throw ParseError({{lines.front().number, RowErrorKind::BadHeader,
                           "expected header 'sample_id,actual_age,estimate[,tags]', got '" +
                               std::string(lines.front().text) + "'"}});
    }

    ParsedLog out;
    std::vector<RowError> errors;
    IdRegistry ids;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [number, text_line] = lines[i];
        const auto fields = split(text_line, ',');
        const bool arity_ok = fields.size() == 3 || (has_tags && fields.size() == 4);
        if (!arity_ok) {
            errors.push_back({number, RowErrorKind::BadArity,
                              "expected " + std::string(has_tags ? "3 or 4" : "3") + " fields, got " +
                                  std::to_string(fields.size())});
            continue;
        }
        const std::size_t before = errors.size();
        Sample s;
        parse_id(fields[0], number, errors);
        parse_age(fields[1], number, errors, s.actual_age);
        const auto estimate = parse_number(fields[2], "estimate", number, errors);
        s.estimate = estimate.value;
        if (fields.size() == 4 && !fields[3].empty()) {
            for (auto tag : split(fields[3], ';')) {
                if (tag.empty() || tag.find_first_of("\",\r\n") != std::string_view::npos) {
                    errors.push_back({number, RowErrorKind::BadTag,
                                      "invalid tag list '" + std::string(fields[3]) + "'"});
                    break;
                }
                s.tags.emplace(tag);
            }
        }
        if (errors.size() != before) continue;
        if (!ids.claim(fields[0], number, errors)) continue;
        s.sample_id = std::string(fields[0]);
        out.samples.push_back(std::move(s));
        out.lines.push_back(number);
    }
    finish(mode, errors, out.skipped);
    return out;
}

std::string write_prediction_log(std::span<const Sample> samples) {
    const bool with_tags =
        std::any_of(samples.begin(), samples.end(), [](const Sample& s) { return !s.tags.empty(); });
    std::string out = with_tags ? "sample_id,actual_age,estimate,tags\n" : "sample_id,actual_age,estimate\n";
    for (const auto& s : samples) {
        if (!valid_id(s.sample_id)) {
            throw DomainError("sample_id '" + s.sample_id + "' cannot be written to CSV");
        }
        if (!std::isfinite(s.actual_age) || !std::isfinite(s.estimate)) {
            throw DomainError("sample '" + s.sample_id + "' has a non-finite value");
        }
        out += s.sample_id;
        out += ',';
        out += format_double(s.actual_age);
        out += ',';
        out += format_double(s.estimate);
        if (with_tags) {
            out += ',';
            bool first = true;
            for (const auto& tag : s.tags) {
                if (tag.empty() || tag.find_first_of("\",;\r\n") != std::string::npos ||
                    trim(tag) != tag) {
                    throw DomainError("tag '" + tag + "' cannot be written to CSV");
                }
                if (!first) out += ';';
                out += tag;
                first = false;
            }
        }
        out += '\n';
    }
    return out;
}

RaterFile parse_rater_file(std::string_view text, ParseMode mode) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw ParseError({{1, RowErrorKind::BadHeader, "missing header"}});
    }
    const auto header = split(lines.front().text, ',');
    if (header.size() < 2 || header[0] != "sample_id" || header[1] != "actual_age") {
        throw ParseError({{lines.front().number, RowErrorKind::BadHeader,
                           "expected header 'sample_id,actual_age,e1,e2,...', got '" +
                               std::string(lines.front().text) + "'"}});
    }

    RaterFile out;
    std::vector<RowError> errors;
    IdRegistry ids;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [number, text_line] = lines[i];
        auto fields = split(text_line, ',');
        // Ragged rows may be padded with trailing empty cells.
        while (fields.size() > 2 && fields.back().empty()) fields.pop_back();
        if (fields.size() < 3) {
            errors.push_back({number, RowErrorKind::BadArity, "row has no rater estimates"});
            continue;
        }
        const std::size_t before = errors.size();
        RaterRow row;
        parse_id(fields[0], number, errors);
        parse_age(fields[1], number, errors, row.actual_age);
        for (std::size_t f = 2; f < fields.size(); ++f) {
            const auto e = parse_number(fields[f], "rater estimate " + std::to_string(f - 1), number, errors);
            row.estimates.push_back(e.value);
        }
        if (errors.size() != before) continue;
        if (!ids.claim(fields[0], number, errors)) continue;
        row.sample_id = std::string(fields[0]);
        out.rows.push_back(std::move(row));
        out.lines.push_back(number);
    }
    finish(mode, errors, out.skipped);
    return out;
}

Dataset aggregate_raters(const RaterFile& file, AggregationPolicy policy) {
    Dataset out;
    out.reserve(file.rows.size());
    for (const auto& row : file.rows) {
        if (row.estimates.empty()) {
            throw DomainError("sample '" + row.sample_id + "' has no rater estimates");
        }
        Sample s;
        s.sample_id = row.sample_id;
        s.actual_age = row.actual_age;
        if (policy == AggregationPolicy::WorstCase) {
            s.estimate = *std::max_element(row.estimates.begin(), row.estimates.end());
        } else {
            const auto [lo, hi] = std::minmax_element(row.estimates.begin(), row.estimates.end());
            const double mean = std::accumulate(row.estimates.begin(), row.estimates.end(), 0.0) /
                                static_cast<double>(row.estimates.size());
            // Rounding can push the sum/n a ulp outside the rater range.
            s.estimate = std::clamp(mean, *lo, *hi);
        }
        s.tags.insert(std::string(tags::kRatersPrefix) + std::to_string(row.estimates.size()));
        out.push_back(std::move(s));
    }
    return out;
}

LegalAgeSplit split_by_legal_age(std::span<const Sample> samples, double legal_age) {
    if (!(legal_age > 0.0) || !std::isfinite(legal_age)) {
        throw DomainError("legal age must be positive");
    }
    LegalAgeSplit out;
    for (const auto& s : samples) {
        const bool positive = s.actual_age < legal_age;
        (positive ? out.positives : out.negatives).push_back({s.sample_id, positive, s.estimate, s.actual_age});
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace zerofail
