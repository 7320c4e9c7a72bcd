#include "zerofail/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "zerofail/ingest.hpp"

#ifndef ZEROFAIL_VERSION
#define ZEROFAIL_VERSION "0.0.0"
#endif

namespace zerofail {

using nlohmann::json;

namespace {

std::vector<double> sorted_ages(std::span<const double> ages) {
    std::vector<double> out(ages.begin(), ages.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string fixed(double x, int digits) {
    if (std::isnan(x)) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

std::string plain(double x) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
    return os.str();
}

std::string short_number(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

json nullable(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

double nan_if_null(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

// ---- JSON ----------------------------------------------------------------

json to_json(const CertificationResult& r) {
    json j;
    j["positive_set_name"] = r.positive_set_name;
    j["positive_count"] = r.positive_count;
    j["negative_count"] = r.negative_count;
    j["operating_point"] = {{"threshold", r.operating_point.threshold},
                            {"k_allowed_failures", r.operating_point.k_allowed_failures},
                            {"source_sample_id", r.operating_point.source_sample_id}};
    json tnrs = json::array();
    for (const auto& t : r.tnr_reports) {
        tnrs.push_back({{"hysteresis_age", t.hysteresis_age},
                        {"eligible_count", t.eligible_count},
                        {"true_negative_count", t.true_negative_count},
                        {"tnr", t.empty() ? json(nullptr) : json(t.tnr)}});
    }
    j["tnr_reports"] = std::move(tnrs);
    if (r.target) {
        j["target"] = {{"confidence", r.target->confidence()},
                       {"reliability", r.target->reliability()}};
        j["required_n"] = {{"exact", r.required->exact}, {"ceiling", r.required->ceiling}};
    } else {
        j["target"] = nullptr;
        j["required_n"] = nullptr;
    }
    j["achieved_confidence"] = nullable(r.achieved_confidence);
    j["warnings"] = r.warnings;
    j["dataset_fingerprint"] = r.dataset_fingerprint;
    j["tool_version"] = r.tool_version;
    j["timestamp"] = r.timestamp;
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    return j;
}

CertificationResult certification_from_json(const json& j) {
    CertificationResult r;
    r.positive_set_name = j.at("positive_set_name").get<std::string>();
    r.positive_count = j.at("positive_count").get<std::size_t>();
    r.negative_count = j.at("negative_count").get<std::size_t>();
    const auto& op = j.at("operating_point");
    r.operating_point.threshold = op.at("threshold").get<double>();
    r.operating_point.k_allowed_failures = op.at("k_allowed_failures").get<std::size_t>();
    r.operating_point.source_sample_id = op.at("source_sample_id").get<std::string>();
    for (const auto& t : j.at("tnr_reports")) {
        TnrReport rep;
        rep.hysteresis_age = t.at("hysteresis_age").get<double>();
        rep.eligible_count = t.at("eligible_count").get<std::size_t>();
        rep.true_negative_count = t.at("true_negative_count").get<std::size_t>();
        rep.tnr = nan_if_null(t.at("tnr"));
        r.tnr_reports.push_back(rep);
    }
    if (!j.at("target").is_null()) {
        const auto& t = j.at("target");
        r.target.emplace(t.at("confidence").get<double>(), t.at("reliability").get<double>());
        const auto& n = j.at("required_n");
        r.required = SampleSize{n.at("exact").get<double>(), n.at("ceiling").get<std::uint64_t>()};
    }
    if (!j.at("achieved_confidence").is_null()) {
        r.achieved_confidence = j.at("achieved_confidence").get<double>();
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_envelope(std::string_view text, std::string_view kind) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != kSchemaVersion) {
        throw std::invalid_argument("unsupported schema; expected " + std::string(kSchemaVersion));
    }
    if (j.value("kind", "") != kind) {
        throw std::invalid_argument("expected a '" + std::string(kind) + "' report");
    }
    return j;
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed report: ") + e.what());
    }
}

// ---- Markdown / CSV helpers ---------------------------------------------

std::string tnr_label(double age) { return "TNR_" + short_number(age); }

void markdown_provenance(std::ostringstream& os, const CertificationResult& r) {
    os << "- dataset fingerprint (sha256): `" << r.dataset_fingerprint << "`\n";
    os << "- tool version: " << r.tool_version << "\n";
    os << "- timestamp: " << r.timestamp << "\n";
    os << "- seed: " << (r.seed ? std::to_string(*r.seed) : std::string("n/a")) << "\n";
}

constexpr std::string_view kCsvHeader =
    "level,positive_count,threshold,source_sample_id,hysteresis_age,eligible_count,"
    "true_negative_count,tnr\n";

void csv_rows(std::ostringstream& os, const CertificationResult& r) {
    for (const auto& t : r.tnr_reports) {
        os << r.positive_set_name << ',' << r.positive_count << ',' << plain(r.operating_point.threshold)
           << ',' << r.operating_point.source_sample_id << ',' << plain(t.hysteresis_age) << ','
           << t.eligible_count << ',' << t.true_negative_count << ','
           << (t.empty() ? std::string() : plain(t.tnr)) << '\n';
    }
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < length; ++i) {
        os << std::setw(2) << static_cast<int>(digest[i]);
    }
    return os.str();
}

}  // namespace

std::string_view tool_version() { return ZEROFAIL_VERSION; }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << "+00:00";
    return os.str();
}

std::string dataset_fingerprint(std::span<const LabeledScore> positives,
                                std::span<const LabeledScore> negatives) {
    Dataset samples;
    samples.reserve(positives.size() + negatives.size());
    for (auto set : {positives, negatives}) {
        for (const auto& s : set) {
            samples.push_back({s.sample_id, s.actual_age, s.score, {}});
        }
    }
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });
    return sha256_hex(write_prediction_log(samples));
}

CertificationResult certify(std::span<const LabeledScore> positives,
                            std::span<const LabeledScore> negatives,
                            std::span<const double> hysteresis_ages, const CertifyOptions& options) {
    CertificationResult r;
    r.positive_set_name = options.positive_set_name;
    r.positive_count = positives.size();
    r.negative_count = negatives.size();
    r.operating_point = zero_failure_threshold(positives);
    for (double age : sorted_ages(hysteresis_ages)) {
        r.tnr_reports.push_back(tnr_at(negatives, r.operating_point, age));
        if (r.tnr_reports.back().empty()) {
            r.warnings.push_back("no negatives aged " + short_number(age) +
                                 " or older; TNR undefined");
        }
    }
    if (options.target) {
        r.target = options.target;
        r.required = required_sample_size(*options.target);
        r.achieved_confidence = achieved_confidence(r.positive_count, options.target->reliability());
        if (r.has_shortfall()) {
            r.warnings.push_back("sample-size shortfall: " + std::to_string(r.positive_count) +
                                 " positives < required " + std::to_string(r.required->ceiling));
        }
    }
    r.dataset_fingerprint = dataset_fingerprint(positives, negatives);
    r.tool_version = std::string(tool_version());
    r.timestamp = options.timestamp.empty() ? utc_timestamp() : options.timestamp;
    r.seed = options.seed;
    return r;
}

bool attest_monotonicity(std::span<const CertificationResult> levels) {
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const auto& lo = levels[i - 1];
        const auto& hi = levels[i];
        if (hi.operating_point.threshold < lo.operating_point.threshold) return false;
        if (hi.tnr_reports.size() != lo.tnr_reports.size()) return false;
        for (std::size_t k = 0; k < hi.tnr_reports.size(); ++k) {
            const auto& a = lo.tnr_reports[k];
            const auto& b = hi.tnr_reports[k];
            if (a.hysteresis_age != b.hysteresis_age || a.eligible_count != b.eligible_count) {
                return false;
            }
            if (b.true_negative_count > a.true_negative_count) return false;
        }
    }
    return true;
}

HierarchyResult certify_hierarchy(const TestHierarchy& hierarchy,
                                  std::span<const LabeledScore> negatives,
                                  std::span<const double> hysteresis_ages,
                                  const CertifyOptions& options) {
    HierarchyResult out;
    out.seed = options.seed ? options.seed : std::optional<std::uint64_t>(hierarchy.seed());
    CertifyOptions level_options = options;
    if (level_options.timestamp.empty()) level_options.timestamp = utc_timestamp();
    level_options.seed = out.seed;
    for (std::size_t i = 0; i < hierarchy.size(); ++i) {
        level_options.positive_set_name = hierarchy.names()[i];
        const auto positives = as_positive_scores(hierarchy.level(i));
        out.levels.push_back(certify(positives, negatives, hysteresis_ages, level_options));
        if (i > 0) {
            auto& prev = out.levels[i - 1].operating_point;
            auto& cur = out.levels[i].operating_point;
            if (cur.threshold == prev.threshold) {
                cur.source_sample_id = prev.source_sample_id;
                out.shared_sources.push_back({i - 1, i, prev.source_sample_id});
            }
        }
    }
    out.monotonicity_attestation = attest_monotonicity(out.levels);
    return out;
}

Table1Report table1_replica(std::uint64_t seed, std::span<const double> hysteresis_ages,
                            double noise_sigma) {
    Table1Report report;
    report.seed = seed;
    report.noise_sigma = noise_sigma;
    report.hysteresis_ages = sorted_ages(hysteresis_ages);
    const auto designs = table1_designs(seed, noise_sigma);
    report.rows = run_table1_experiment(designs, report.hysteresis_ages);
    report.targets = {ReliabilityTarget(0.95, 0.95), ReliabilityTarget(0.95, 0.995),
                      ReliabilityTarget(0.95, 0.998)};
    return report;
}

std::optional<Format> parse_format(std::string_view name) {
    if (name == "json") return Format::Json;
    if (name == "markdown" || name == "md") return Format::Markdown;
    if (name == "csv") return Format::Csv;
    return std::nullopt;
}

std::string render(const CertificationResult& r, Format format) {
    std::ostringstream os;
    switch (format) {
        case Format::Json: {
            json j = to_json(r);
            j["schema"] = kSchemaVersion;
            j["kind"] = "certification";
            return dump(j);
        }
        case Format::Markdown: {
            os << "# Zero-failure certification: " << r.positive_set_name << "\n\n";
            os << "| N | threshold | source |";
            for (const auto& t : r.tnr_reports) os << ' ' << tnr_label(t.hysteresis_age) << " |";
            os << "\n|---|---|---|";
            for (std::size_t i = 0; i < r.tnr_reports.size(); ++i) os << "---|";
            os << "\n| " << r.positive_count << " | " << fixed(r.operating_point.threshold, 2) << " | "
               << r.operating_point.source_sample_id << " |";
            for (const auto& t : r.tnr_reports) os << ' ' << fixed(t.tnr, 4) << " |";
            os << "\n\n";
            os << "- alarm rule: estimate <= " << plain(r.operating_point.threshold) << "\n";
            os << "- negatives: " << r.negative_count << "\n";
            for (const auto& t : r.tnr_reports) {
                os << "- " << tnr_label(t.hysteresis_age) << ": " << t.true_negative_count << " / "
                   << t.eligible_count << "\n";
            }
            if (r.target) {
                os << "- target: confidence " << short_number(r.target->confidence())
                   << ", reliability " << short_number(r.target->reliability()) << "\n";
                os << "- required N: exact " << fixed(r.required->exact, 1) << ", ceiling "
                   << r.required->ceiling << ", used " << r.positive_count << "\n";
                os << "- achieved confidence at N = " << r.positive_count << ": "
                   << fixed(*r.achieved_confidence, 4) << "\n";
            }
            markdown_provenance(os, r);
            for (const auto& w : r.warnings) os << "\n> WARNING: " << w << "\n";
            return os.str();
        }
        case Format::Csv:
            os << kCsvHeader;
            csv_rows(os, r);
            return os.str();
    }
    return {};
}

std::string render(const HierarchyResult& h, Format format) {
    std::ostringstream os;
    switch (format) {
        case Format::Json: {
            json j;
            j["schema"] = kSchemaVersion;
            j["kind"] = "hierarchy";
            j["monotonicity_attestation"] = h.monotonicity_attestation;
            j["seed"] = h.seed ? json(*h.seed) : json(nullptr);
            json levels = json::array();
            for (const auto& l : h.levels) levels.push_back(to_json(l));
            j["levels"] = std::move(levels);
            json shared = json::array();
            for (const auto& s : h.shared_sources) {
                shared.push_back({{"lower_level", s.lower_level},
                                  {"upper_level", s.upper_level},
                                  {"sample_id", s.sample_id}});
            }
            j["shared_sources"] = std::move(shared);
            return dump(j);
        }
        case Format::Markdown: {
            os << "# Nested zero-failure hierarchy\n\n";
            const std::size_t blocks = h.levels.empty() ? 0 : h.levels.front().tnr_reports.size();
            for (std::size_t b = 0; b < blocks; ++b) {
                const auto& first = h.levels.front().tnr_reports[b];
                os << "## Challenge " << short_number(first.hysteresis_age) << " ("
                   << first.eligible_count << " eligible negatives)\n\n";
                os << "| test set | N | threshold | source | TNR |\n|---|---|---|---|---|\n";
                for (const auto& l : h.levels) {
                    os << "| " << l.positive_set_name << " | " << l.positive_count << " | "
                       << fixed(l.operating_point.threshold, 2) << " | "
                       << l.operating_point.source_sample_id << " | "
                       << fixed(l.tnr_reports[b].tnr, 4) << " |\n";
                }
                os << "\n";
            }
            os << "- monotonicity attestation: "
               << (h.monotonicity_attestation ? "thresholds non-decreasing, TNRs non-increasing"
                                              : "VIOLATED")
               << "\n";
            for (const auto& s : h.shared_sources) {
                os << "- " << h.levels[s.lower_level].positive_set_name << " and "
                   << h.levels[s.upper_level].positive_set_name << " share threshold source "
                   << s.sample_id << "\n";
            }
            if (!h.levels.empty()) markdown_provenance(os, h.levels.back());
            for (const auto& l : h.levels) {
                for (const auto& w : l.warnings) {
                    os << "\n> WARNING (" << l.positive_set_name << "): " << w << "\n";
                }
            }
            return os.str();
        }
        case Format::Csv:
            os << kCsvHeader;
            for (const auto& l : h.levels) csv_rows(os, l);
            return os.str();
    }
    return {};
}

std::string render(const Table1Report& t, Format format) {
    std::ostringstream os;
    switch (format) {
        case Format::Json: {
            json j;
            j["schema"] = kSchemaVersion;
            j["kind"] = "table1";
            j["seed"] = t.seed;
            j["noise_sigma"] = t.noise_sigma;
            j["hysteresis_ages"] = t.hysteresis_ages;
            json rows = json::array();
            for (std::size_t i = 0; i < t.rows.size(); ++i) {
                const auto& row = t.rows[i];
                json r;
                r["n"] = row.n;
                r["threshold"] = row.operating_point.threshold;
                r["source_sample_id"] = row.operating_point.source_sample_id;
                json tnrs = json::array();
                for (const auto& rep : row.tnrs) {
                    tnrs.push_back({{"hysteresis_age", rep.hysteresis_age},
                                    {"eligible_count", rep.eligible_count},
                                    {"true_negative_count", rep.true_negative_count},
                                    {"tnr", rep.empty() ? json(nullptr) : json(rep.tnr)}});
                }
                r["tnr_reports"] = std::move(tnrs);
                if (i < t.targets.size() && t.targets[i]) {
                    const auto& tg = *t.targets[i];
                    r["target"] = {{"confidence", tg.confidence()}, {"reliability", tg.reliability()}};
                    r["required_n_exact"] = required_sample_size(tg).exact;
                } else {
                    r["target"] = nullptr;
                    r["required_n_exact"] = nullptr;
                }
                rows.push_back(std::move(r));
            }
            j["rows"] = std::move(rows);
            return dump(j);
        }
        case Format::Markdown: {
            os << "| (c, 1-p) | N | threshold |";
            for (double a : t.hysteresis_ages) os << ' ' << tnr_label(a) << " |";
            os << "\n|---|---|---|";
            for (std::size_t i = 0; i < t.hysteresis_ages.size(); ++i) os << "---|";
            os << "\n";
            for (std::size_t i = 0; i < t.rows.size(); ++i) {
                const auto& row = t.rows[i];
                os << "| ";
                if (i < t.targets.size() && t.targets[i]) {
                    os << '(' << short_number(t.targets[i]->confidence()) << ", "
                       << short_number(t.targets[i]->reliability()) << ')';
                } else {
                    os << '-';
                }
                os << " | " << row.n << " | " << fixed(row.operating_point.threshold, 1) << " |";
                for (const auto& rep : row.tnrs) os << ' ' << fixed(rep.tnr, 4) << " |";
                os << "\n";
            }
            os << "\nseed " << t.seed << ", noise sigma " << short_number(t.noise_sigma) << "\n";
            return os.str();
        }
        case Format::Csv:
            os << "n,threshold,source_sample_id,hysteresis_age,eligible_count,true_negative_count,tnr\n";
            for (const auto& row : t.rows) {
                for (const auto& rep : row.tnrs) {
                    os << row.n << ',' << plain(row.operating_point.threshold) << ','
                       << row.operating_point.source_sample_id << ',' << plain(rep.hysteresis_age)
                       << ',' << rep.eligible_count << ',' << rep.true_negative_count << ','
                       << (rep.empty() ? std::string() : plain(rep.tnr)) << '\n';
                }
            }
            return os.str();
    }
    return {};
}

CertificationResult parse_certification_json(std::string_view text) {
    const json j = parse_envelope(text, "certification");
    return guarded([&] { return certification_from_json(j); });
}

HierarchyResult parse_hierarchy_json(std::string_view text) {
    const json j = parse_envelope(text, "hierarchy");
    return guarded([&] {
        HierarchyResult h;
        h.monotonicity_attestation = j.at("monotonicity_attestation").get<bool>();
        if (!j.at("seed").is_null()) h.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& l : j.at("levels")) h.levels.push_back(certification_from_json(l));
        for (const auto& s : j.at("shared_sources")) {
            h.shared_sources.push_back({s.at("lower_level").get<std::size_t>(),
                                        s.at("upper_level").get<std::size_t>(),
                                        s.at("sample_id").get<std::string>()});
        }
        return h;
    });
}

}  // namespace zerofail
