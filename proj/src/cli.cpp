#include "zerofail/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "zerofail/core.hpp"
#include "zerofail/ingest.hpp"
#include "zerofail/report.hpp"
#include "zerofail/synth.hpp"
#include "zerofail/testsets.hpp"

namespace zerofail::cli {

namespace {

using nlohmann::json;

struct Config {
    double legal_age = 18.0;
    std::vector<double> hysteresis{18.0, 25.0, 30.0};
    std::uint64_t seed = 0;
    std::string format = "markdown";
    std::string out_path;
    bool lenient = false;
    std::string timestamp;
    std::string raters;  // empty: prediction log; otherwise mean / worst_case rater file
};

/// An error that maps straight to an exit code with a message on stderr.
struct CommandError {
    int code;
    std::string message;
};

void add_common_options(CLI::App& cmd, Config& cfg) {
    cmd.add_option("--legal-age", cfg.legal_age, "Legal age threshold in years");
    cmd.add_option("--hysteresis", cfg.hysteresis, "Comma-separated hysteresis (Challenge) ages")
        ->delimiter(',');
    cmd.add_option("--seed", cfg.seed, "Random seed (always printed in reports)");
    cmd.add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"json", "markdown", "csv"}));
    cmd.add_option("--out", cfg.out_path, "Write the report to this file instead of stdout");
    cmd.add_flag("--lenient", cfg.lenient, "Skip malformed rows instead of failing");
    cmd.add_option("--timestamp", cfg.timestamp, "Fixed report timestamp (default: now, UTC)");
}

void validate(Config& cfg) {
    if (!(cfg.legal_age > 0.0) || !std::isfinite(cfg.legal_age)) {
        throw CommandError{kUsageOrInputError, "--legal-age must be positive"};
    }
    if (cfg.hysteresis.empty()) {
        throw CommandError{kUsageOrInputError, "--hysteresis needs at least one age"};
    }
    for (double h : cfg.hysteresis) {
        if (!std::isfinite(h) || h < cfg.legal_age) {
            throw CommandError{kUsageOrInputError, "--hysteresis ages must be >= --legal-age"};
        }
    }
    std::sort(cfg.hysteresis.begin(), cfg.hysteresis.end());
    cfg.hysteresis.erase(std::unique(cfg.hysteresis.begin(), cfg.hysteresis.end()), cfg.hysteresis.end());
}

Format format_of(const Config& cfg) { return parse_format(cfg.format).value_or(Format::Markdown); }

void emit(const std::string& text, const Config& cfg, std::ostream& out) {
    if (cfg.out_path.empty() || cfg.out_path == "-") {
        out << text;
        return;
    }
    std::ofstream file(cfg.out_path, std::ios::binary);
    if (!file || !(file << text)) {
        throw CommandError{kUsageOrInputError, "cannot write '" + cfg.out_path + "'"};
    }
}

Dataset load_samples(const std::string& path, const Config& cfg, std::ostream& err) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::runtime_error& e) {
        throw CommandError{kUsageOrInputError, e.what()};
    }
    const auto mode = cfg.lenient ? ParseMode::Lenient : ParseMode::Strict;
    try {
        if (cfg.raters.empty()) {
            auto log = parse_prediction_log(text, mode);
            for (const auto& e : log.skipped) {
                err << path << ":" << e.line << ": skipped: " << e.message << "\n";
            }
            return std::move(log.samples);
        }
        auto raters = parse_rater_file(text, mode);
        for (const auto& e : raters.skipped) {
            err << path << ":" << e.line << ": skipped: " << e.message << "\n";
        }
        return aggregate_raters(raters, cfg.raters == "worst_case" ? AggregationPolicy::WorstCase
                                                                   : AggregationPolicy::Mean);
    } catch (const ParseError& e) {
        std::ostringstream os;
        os << "parse failed with " << e.errors().size() << " error(s)";
        for (const auto& row : e.errors()) {
            os << "\n" << path << ":" << row.line << ": " << to_string(row.kind) << ": " << row.message;
        }
        throw CommandError{kUsageOrInputError, os.str()};
    }
}

void add_raters_option(CLI::App& cmd, Config& cfg) {
    cmd.add_option("--raters", cfg.raters,
                   "Treat the input as a multi-rater file aggregated with this policy")
        ->check(CLI::IsMember({"mean", "worst_case"}));
}

std::optional<ReliabilityTarget> target_from(const std::optional<double>& confidence,
                                             const std::optional<double>& reliability) {
    if (!confidence && !reliability) return std::nullopt;
    if (!confidence || !reliability) {
        throw CommandError{kUsageOrInputError, "--confidence and --reliability must be given together"};
    }
    if (!(*confidence > 0.0 && *confidence < 1.0)) {
        throw CommandError{kUsageOrInputError, "--confidence must lie in (0, 1)"};
    }
    if (!(*reliability > 0.0 && *reliability < 1.0)) {
        throw CommandError{kUsageOrInputError, "--reliability must lie in (0, 1)"};
    }
    return ReliabilityTarget(*confidence, *reliability);
}

CertifyOptions certify_options(const Config& cfg, const std::optional<ReliabilityTarget>& target,
                               std::string name) {
    CertifyOptions opts;
    opts.positive_set_name = std::move(name);
    opts.target = target;
    opts.seed = cfg.seed;
    opts.timestamp = cfg.timestamp;
    return opts;
}

Dataset positives_of(const Dataset& samples, double legal_age) {
    Dataset out;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
                 [&](const Sample& s) { return s.actual_age < legal_age; });
    return out;
}

// ---- plan ----------------------------------------------------------------

std::string render_plan(const ReliabilityTarget& target, Format format) {
    const auto n = required_sample_size(target);
    const double achieved = achieved_confidence(n.ceiling, target.reliability());
    const std::vector<double> confidences{0.90, 0.95, 0.99};
    const std::vector<double> reliabilities{0.90, 0.95, 0.99, 0.995, 0.998, 0.999};

    struct Row {
        double confidence, reliability;
        SampleSize n;
    };
    std::vector<Row> rows;
    for (double c : confidences) {
        rows.push_back({c, target.reliability(), required_sample_size({c, target.reliability()})});
    }
    for (double r : reliabilities) {
        rows.push_back({target.confidence(), r, required_sample_size({target.confidence(), r})});
    }

    std::ostringstream os;
    switch (format) {
        case Format::Json: {
            json j;
            j["schema"] = kSchemaVersion;
            j["kind"] = "plan";
            j["confidence"] = target.confidence();
            j["reliability"] = target.reliability();
            j["required_n"] = {{"exact", n.exact}, {"ceiling", n.ceiling}};
            j["achieved_confidence_at_ceiling"] = achieved;
            json sens = json::array();
            for (const auto& r : rows) {
                sens.push_back({{"confidence", r.confidence},
                                {"reliability", r.reliability},
                                {"exact", r.n.exact},
                                {"ceiling", r.n.ceiling}});
            }
            j["sensitivity"] = std::move(sens);
            return j.dump(2) + "\n";
        }
        case Format::Markdown:
            os << "# Zero-failure test plan\n\n";
            os << "- confidence " << target.confidence() << ", reliability " << target.reliability()
               << "\n";
            os << "- required N: exact " << std::fixed << std::setprecision(1) << n.exact
               << ", ceiling " << n.ceiling << "\n";
            os << "- achieved confidence at N = " << n.ceiling << ": " << std::setprecision(4)
               << achieved << "\n\n";
            os << "## Sensitivity\n\n| confidence | reliability | exact N | ceiling N |\n|---|---|---|---|\n";
            for (const auto& r : rows) {
                os << std::defaultfloat << "| " << r.confidence << " | " << r.reliability << " | "
                   << std::fixed << std::setprecision(1) << r.n.exact << " | " << r.n.ceiling << " |\n";
            }
            return os.str();
        case Format::Csv:
            os << "confidence,reliability,exact_n,ceiling_n\n";
            os << std::setprecision(17);
            os << target.confidence() << ',' << target.reliability() << ',' << n.exact << ','
               << n.ceiling << '\n';
            for (const auto& r : rows) {
                os << r.confidence << ',' << r.reliability << ',' << r.n.exact << ',' << r.n.ceiling
                   << '\n';
            }
            return os.str();
    }
    return {};
}

// ---- diagnose ------------------------------------------------------------

struct Diagnosis {
    double gap_years;
    std::vector<DiagnosticFlag> clerical;
    std::vector<std::pair<double, std::vector<DiagnosticFlag>>> hard;
    std::vector<DiagnosticFlag> attacks;
};

json flag_json(const DiagnosticFlag& f) {
    return {{"sample_id", f.sample_id},
            {"kind", std::string(to_string(f.kind))},
            {"detail", f.detail},
            {"severity_score", f.severity_score}};
}

std::string render_diagnosis(const Diagnosis& d, Format format) {
    std::ostringstream os;
    switch (format) {
        case Format::Json: {
            json j;
            j["schema"] = kSchemaVersion;
            j["kind"] = "diagnosis";
            j["gap_years"] = d.gap_years;
            j["clerical_suspects"] = json::array();
            for (const auto& f : d.clerical) j["clerical_suspects"].push_back(flag_json(f));
            j["hard_examples"] = json::array();
            for (const auto& [age, flags] : d.hard) {
                json block{{"hysteresis_age", age}, {"flags", json::array()}};
                for (const auto& f : flags) block["flags"].push_back(flag_json(f));
                j["hard_examples"].push_back(std::move(block));
            }
            j["attack_suspects"] = json::array();
            for (const auto& f : d.attacks) j["attack_suspects"].push_back(flag_json(f));
            return j.dump(2) + "\n";
        }
        case Format::Markdown: {
            auto table = [&os](const std::vector<DiagnosticFlag>& flags) {
                if (flags.empty()) {
                    os << "none\n\n";
                    return;
                }
                os << "| sample_id | severity | detail |\n|---|---|---|\n";
                for (const auto& f : flags) {
                    os << "| " << f.sample_id << " | " << f.severity_score << " | " << f.detail << " |\n";
                }
                os << "\n";
            };
            os << "# Dataset diagnosis\n\n## Clerical suspects (gap >= " << d.gap_years << " years)\n\n";
            table(d.clerical);
            for (const auto& [age, flags] : d.hard) {
                os << "## Hard examples (positives estimated above " << age << ")\n\n";
                table(flags);
            }
            os << "## Attack-tagged samples\n\n";
            table(d.attacks);
            return os.str();
        }
        case Format::Csv: {
            os << "kind,hysteresis_age,sample_id,severity_score,detail\n";
            auto rows = [&os](const std::vector<DiagnosticFlag>& flags, const std::string& age) {
                for (const auto& f : flags) {
                    os << to_string(f.kind) << ',' << age << ',' << f.sample_id << ','
                       << std::setprecision(17) << f.severity_score << ',' << f.detail << '\n';
                }
            };
            rows(d.clerical, "");
            for (const auto& [age, flags] : d.hard) {
                std::ostringstream a;
                a << age;
                rows(flags, a.str());
            }
            rows(d.attacks, "");
            return os.str();
        }
    }
    return {};
}

AgeRange parse_range(const std::string& text, const char* flag) {
    AgeRange r;
    const auto dots = text.find("..");
    auto parse_int = [&](std::string_view s, int& value) {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
    };
    const std::string_view sv(text);
    const bool ok = dots == std::string::npos
                        ? parse_int(sv, r.first) && (r.last = r.first, true)
                        : parse_int(sv.substr(0, dots), r.first) && parse_int(sv.substr(dots + 2), r.last);
    if (!ok) {
        throw CommandError{kUsageOrInputError,
                           std::string(flag) + " expects FIRST..LAST or a single age, got '" + text + "'"};
    }
    return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zero-failure certification of score-based binary classifiers", "zerofail"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    Config cfg;

    // plan
    auto* plan = app.add_subcommand("plan", "Zero-failure test size for a confidence/reliability target");
    double plan_confidence = 0.0;
    double plan_reliability = 0.0;
    plan->add_option("--confidence", plan_confidence, "Confidence c in (0, 1)")->required();
    plan->add_option("--reliability", plan_reliability, "Reliability 1-p in (0, 1)")->required();
    add_common_options(*plan, cfg);

    // certify
    auto* certify_cmd = app.add_subcommand("certify", "Set the zero-failure operating point and report TNRs");
    std::string log_path;
    std::optional<double> confidence;
    std::optional<double> reliability;
    certify_cmd->add_option("log", log_path, "Prediction log (CSV)")->required();
    certify_cmd->add_option("--confidence", confidence, "Target confidence (with --reliability)");
    certify_cmd->add_option("--reliability", reliability, "Target reliability (with --confidence)");
    add_raters_option(*certify_cmd, cfg);
    add_common_options(*certify_cmd, cfg);

    // hierarchy
    auto* hierarchy_cmd = app.add_subcommand("hierarchy", "Certify a nested chain of positive test sets");
    std::vector<std::size_t> sizes;
    bool attack_split = false;
    hierarchy_cmd->add_option("log", log_path, "Prediction log (CSV)")->required();
    hierarchy_cmd->add_option("--sizes", sizes, "Strictly ascending level sizes, e.g. 60,200,600,1550")
        ->delimiter(',');
    hierarchy_cmd->add_flag("--attack-split", attack_split,
                            "Two levels: positives not tagged attack, then all positives");
    hierarchy_cmd->add_option("--confidence", confidence, "Target confidence (with --reliability)");
    hierarchy_cmd->add_option("--reliability", reliability, "Target reliability (with --confidence)");
    add_raters_option(*hierarchy_cmd, cfg);
    add_common_options(*hierarchy_cmd, cfg);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Synthetic Gaussian-noise experiment");
    SyntheticDesign design;
    std::string years = "12..17";
    std::string negative_years = "18..50";
    std::string emit_csv;
    bool table1 = false;
    simulate->add_option("--per-year-positive", design.per_year_positive, "Positives per year of age");
    simulate->add_option("--per-year-negative", design.per_year_negative, "Negatives per year of age");
    simulate->add_option("--years", years, "Positive age range FIRST..LAST");
    simulate->add_option("--negative-years", negative_years, "Negative age range FIRST..LAST");
    simulate->add_option("--sigma", design.noise_sigma, "Standard deviation of the estimation noise");
    simulate->add_option("--mean", design.noise_mean, "Mean of the estimation noise");
    simulate->add_option("--emit-csv", emit_csv, "Write the generated dataset as CSV ('-' for stdout)");
    simulate->add_flag("--table1", table1, "Run the three-design (N = 60, 600, 1500) experiment");
    add_common_options(*simulate, cfg);

    // diagnose
    auto* diagnose = app.add_subcommand("diagnose", "Flag clerical suspects, hard examples and attack tags");
    double gap_years = kDefaultClericalGapYears;
    diagnose->add_option("log", log_path, "Prediction log (CSV)")->required();
    diagnose->add_option("--gap", gap_years, "Clerical-suspect gap in years");
    add_raters_option(*diagnose, cfg);
    add_common_options(*diagnose, cfg);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageOrInputError;
    }

    try {
        validate(cfg);
        const Format format = format_of(cfg);

        if (plan->parsed()) {
            const auto target = target_from(plan_confidence, plan_reliability);
            emit(render_plan(*target, format), cfg, out);
            return kOk;
        }

        if (certify_cmd->parsed()) {
            const auto target = target_from(confidence, reliability);
            const Dataset samples = load_samples(log_path, cfg, err);
            const auto split = split_by_legal_age(samples, cfg.legal_age);
            if (split.positives.empty()) {
                err << "error: " << log_path << " contains no positives (actual age < " << cfg.legal_age
                    << ")\n";
                return kNoPositives;
            }
            const auto result = certify(split.positives, split.negatives, cfg.hysteresis,
                                        certify_options(cfg, target, "positives"));
            for (const auto& w : result.warnings) err << "warning: " << w << "\n";
            emit(render(result, format), cfg, out);
            return kOk;
        }

        if (hierarchy_cmd->parsed()) {
            const auto target = target_from(confidence, reliability);
            const Dataset samples = load_samples(log_path, cfg, err);
            const Dataset positives = positives_of(samples, cfg.legal_age);
            const auto split = split_by_legal_age(samples, cfg.legal_age);
            TestHierarchy hierarchy = [&] {
                if (attack_split) {
                    Dataset regular;
                    Dataset attacks;
                    for (const auto& s : positives) {
                        (s.has_tag(tags::kAttack) ? attacks : regular).push_back(s);
                    }
                    return extend_with_attacks(regular, attacks, cfg.legal_age);
                }
                if (sizes.empty()) {
                    throw CommandError{kUsageOrInputError, "--sizes or --attack-split is required"};
                }
                return build_hierarchy(positives, sizes, cfg.seed, cfg.legal_age);
            }();
            const auto result = certify_hierarchy(hierarchy, split.negatives, cfg.hysteresis,
                                                  certify_options(cfg, target, ""));
            if (!result.monotonicity_attestation) {
                err << "error: monotonicity attestation failed\n";
            }
            emit(render(result, format), cfg, out);
            return kOk;
        }

        if (simulate->parsed()) {
            design.positive_ages = parse_range(years, "--years");
            design.negative_ages = parse_range(negative_years, "--negative-years");
            design.seed = cfg.seed;
            if (table1) {
                design.validate();
                if (!emit_csv.empty()) {
                    throw CommandError{kUsageOrInputError, "--table1 and --emit-csv are exclusive"};
                }
                emit(render(table1_replica(cfg.seed, cfg.hysteresis, design.noise_sigma), format), cfg, out);
                return kOk;
            }
            const Dataset data = generate(design);
            if (!emit_csv.empty()) {
                Config csv_cfg = cfg;
                csv_cfg.out_path = emit_csv;
                emit(write_prediction_log(data), csv_cfg, out);
                return kOk;
            }
            const auto split = split_by_legal_age(data, cfg.legal_age);
            if (split.positives.empty()) {
                err << "error: the design produced no positives under --legal-age\n";
                return kNoPositives;
            }
            const auto result = certify(split.positives, split.negatives, cfg.hysteresis,
                                        certify_options(cfg, std::nullopt, "synthetic"));
            emit(render(result, format), cfg, out);
            return kOk;
        }

        if (diagnose->parsed()) {
            if (!(gap_years > 0.0)) {
                throw CommandError{kUsageOrInputError, "--gap must be positive"};
            }
            const Dataset samples = load_samples(log_path, cfg, err);
            const Dataset positives = positives_of(samples, cfg.legal_age);
            Diagnosis d{gap_years, flag_clerical_suspects(samples, gap_years), {}, attack_suspects(samples)};
            for (double h : cfg.hysteresis) {
                if (h > cfg.legal_age) d.hard.emplace_back(h, hard_examples(positives, h, cfg.legal_age));
            }
            emit(render_diagnosis(d, format), cfg, out);
            return kOk;
        }
    } catch (const CommandError& e) {
        err << "error: " << e.message << "\n";
        return e.code;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageOrInputError;
    }
    return kUsageOrInputError;
}

}  // namespace zerofail::cli
