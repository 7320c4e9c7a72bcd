#include "doctest.h"

#include <algorithm>
#include <regex>
#include <sstream>

#include "oracles.hpp"
#include "zerofail/ingest.hpp"
#include "zerofail/report.hpp"

using namespace zerofail;

namespace {

const std::vector<double> kAges{18, 25, 30};

std::size_t count_lines(const std::string& text, const std::string& prefix) {
    std::istringstream is(text);
    std::size_t n = 0;
    for (std::string line; std::getline(is, line);) n += line.rfind(prefix, 0) == 0 ? 1 : 0;
    return n;
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

CertifyOptions fixed_time(std::optional<ReliabilityTarget> target = std::nullopt) {
    CertifyOptions o;
    o.timestamp = "2026-01-01T00:00:00+00:00";
    o.target = target;
    return o;
}

}  // namespace

TEST_CASE("certify composes threshold, TNRs and provenance") {
    oracle::Gen gen(41);
    const auto pos = gen.positives(60);
    const auto neg = gen.negatives(500);
    const std::vector<double> unsorted{30, 18, 25};
    const auto r = certify(pos, neg, unsorted, fixed_time(ReliabilityTarget(0.95, 0.95)));
    CHECK(r.positive_count == 60);
    CHECK(r.operating_point.threshold == oracle::naive_max(pos).first);
    REQUIRE(r.tnr_reports.size() == 3);
    CHECK(r.tnr_reports[0].hysteresis_age == 18);
    CHECK(r.tnr_reports[2].hysteresis_age == 30);
    CHECK(r.required->ceiling == 59);
    CHECK(r.achieved_confidence.value() == doctest::Approx(achieved_confidence(60, 0.95)));
    CHECK_FALSE(r.has_shortfall());
    CHECK(r.warnings.empty());
    CHECK(r.dataset_fingerprint.size() == 64);
    CHECK(r.tool_version == tool_version());
    for (const auto& t : r.tnr_reports) {
        CHECK(std::fabs(t.tnr - static_cast<double>(t.true_negative_count) /
                                    static_cast<double>(t.eligible_count)) <= 1e-12);
    }
}

TEST_CASE("certify flags a sample-size shortfall") {
    oracle::Gen gen(42);
    const auto neg = gen.negatives(100);
    const auto r50 = certify(gen.positives(50), neg, kAges, fixed_time(ReliabilityTarget(0.95, 0.95)));
    CHECK(r50.has_shortfall());
    REQUIRE(r50.warnings.size() == 1);
    CHECK(r50.warnings[0].find("shortfall") != std::string::npos);
    const auto r59 = certify(gen.positives(59), neg, kAges, fixed_time(ReliabilityTarget(0.95, 0.95)));
    CHECK_FALSE(r59.has_shortfall());
    const auto no_target = certify(gen.positives(5), neg, kAges, fixed_time());
    CHECK_FALSE(no_target.has_shortfall());
    CHECK_FALSE(no_target.achieved_confidence.has_value());
    CHECK_THROWS_AS(certify(std::vector<LabeledScore>{}, neg, kAges), DomainError);
}

TEST_CASE("dataset fingerprint binds to the data, not to order or time") {
    oracle::Gen gen(43);
    auto pos = gen.positives(30);
    auto neg = gen.negatives(40);
    const auto a = certify(pos, neg, kAges, fixed_time());
    std::reverse(pos.begin(), pos.end());
    std::reverse(neg.begin(), neg.end());
    CertifyOptions later = fixed_time();
    later.timestamp = "2030-06-01T12:00:00+00:00";
    const auto b = certify(pos, neg, kAges, later);
    CHECK(a.dataset_fingerprint == b.dataset_fingerprint);
    neg[0].score += 0.5;
    CHECK(certify(pos, neg, kAges, later).dataset_fingerprint != a.dataset_fingerprint);
    CHECK(std::regex_match(utc_timestamp(),
                           std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\+00:00)")));
}

TEST_CASE("certify_hierarchy mirrors a four-level table") {
    oracle::Gen gen(44);
    const auto pool = gen.positive_samples(1550);
    const std::vector<std::size_t> sizes{60, 200, 600, 1550};
    const auto h = build_hierarchy(pool, sizes, 3);
    const auto neg = gen.negatives(2000);
    const auto result = certify_hierarchy(h, neg, kAges, fixed_time());
    REQUIRE(result.levels.size() == 4);
    CHECK(result.monotonicity_attestation);
    CHECK(result.seed == 3);

    const auto md = render(result, Format::Markdown);
    CHECK(count_lines(md, "## Challenge ") == 3);
    CHECK(count_lines(md, "| zFail-") == 12);
    const auto csv = render(result, Format::Csv);
    CHECK(line_count(csv) == 1 + 4 * 3);
}

TEST_CASE("certify_hierarchy: single level and shared sources") {
    const Dataset regular{{"b", 15, 20.0, {}}, {"c", 16, 12.0, {}}};
    const Dataset attacks{{"a", 17, 20.0, {"attack"}}};
    const auto h = extend_with_attacks(regular, attacks);
    const std::vector<LabeledScore> neg{{"n1", false, 25, 30}, {"n2", false, 19, 19}};
    const auto result = certify_hierarchy(h, neg, kAges, fixed_time());
    REQUIRE(result.levels.size() == 2);
    CHECK(result.levels[0].operating_point.source_sample_id == "b");
    // "a" would win the plain id tie-break, but "b" is an arg-max in both levels.
    CHECK(result.levels[1].operating_point.source_sample_id == "b");
    REQUIRE(result.shared_sources.size() == 1);
    CHECK(result.shared_sources[0].sample_id == "b");
    CHECK(result.monotonicity_attestation);

    const auto single = build_hierarchy(regular, std::vector<std::size_t>{2}, 0);
    CHECK(certify_hierarchy(single, neg, kAges, fixed_time()).monotonicity_attestation);
}

TEST_CASE("attest_monotonicity detects violations") {
    oracle::Gen gen(45);
    const auto neg = gen.negatives(200);
    auto lo = certify(gen.positives(20), neg, kAges, fixed_time());
    auto hi = lo;
    hi.operating_point.threshold = lo.operating_point.threshold - 1.0;
    const std::vector<CertificationResult> bad{lo, hi};
    CHECK_FALSE(attest_monotonicity(bad));
    const std::vector<CertificationResult> good{lo, lo};
    CHECK(attest_monotonicity(good));
}

TEST_CASE("JSON rendering is canonical and round-trips") {
    oracle::Gen gen(46);
    const auto neg = gen.negatives(300);
    std::vector<double> ages{18, 25, 70};  // 70 leaves no eligible negatives
    const auto r = certify(gen.positives(40), neg, ages, fixed_time(ReliabilityTarget(0.9, 0.99)));
    REQUIRE(r.tnr_reports[2].empty());
    const auto json = render(r, Format::Json);
    CHECK(json.find("\"schema\": \"zerofail/1\"") != std::string::npos);
    const auto back = parse_certification_json(json);
    CHECK(render(back, Format::Json) == json);
    CHECK(back.operating_point.threshold == r.operating_point.threshold);
    CHECK(std::isnan(back.tnr_reports[2].tnr));

    const auto h = certify_hierarchy(build_hierarchy(gen.positive_samples(100), std::vector<std::size_t>{10, 50}, 1),
                                     neg, kAges, fixed_time());
    const auto hjson = render(h, Format::Json);
    CHECK(render(parse_hierarchy_json(hjson), Format::Json) == hjson);

    CHECK_THROWS_AS(parse_certification_json("{}"), std::invalid_argument);
    CHECK_THROWS_AS(parse_certification_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(parse_certification_json(hjson), std::invalid_argument);
}

TEST_CASE("three-design replica renders one header row and three data rows") {
    const std::vector<double> ages{18, 25};
    const auto t = table1_replica(0, ages);
    const auto md = render(t, Format::Markdown);
    CHECK(count_lines(md, "| (c, 1-p) | N | threshold | TNR_18 | TNR_25 |") == 1);
    CHECK(count_lines(md, "| (0.95, ") == 3);
    CHECK(md.find("| 60 |") != std::string::npos);
    CHECK(md.find("| 600 |") != std::string::npos);
    CHECK(md.find("| 1500 |") != std::string::npos);
    CHECK(line_count(render(t, Format::Csv)) == 1 + 3 * 2);
    CHECK(render(t, Format::Json).find("\"kind\": \"table1\"") != std::string::npos);
}

TEST_CASE("human formats print four-decimal TNRs") {
    const std::vector<LabeledScore> pos{{"p", true, 20.0, 15}};
    const std::vector<LabeledScore> neg{{"a", false, 21, 30}, {"b", false, 19, 30}, {"c", false, 25, 30}};
    const auto r = certify(pos, neg, std::vector<double>{18}, fixed_time());
    const auto md = render(r, Format::Markdown);
    CHECK(md.find("| 1 | 20.00 | p | 0.6667 |") != std::string::npos);
    const auto csv = render(r, Format::Csv);
    CHECK(line_count(csv) == 2);
    CHECK(csv.find("0.66666666666666663") != std::string::npos);
}
