#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "zerofail/ingest.hpp"

using namespace zerofail;

namespace {

Dataset random_dataset(std::mt19937_64& eng, std::size_t n) {
    std::uniform_real_distribution<double> age(0.0, 80.0);
    std::normal_distribution<double> noise(0.0, 5.0);
    std::uniform_int_distribution<int> tag_pick(0, 5);
    const std::vector<std::string> pool{"regular", "attack", "low_quality", "suspect_clerical", "raters=30"};
    Dataset out;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        s.sample_id = "id-" + std::to_string(i) + "_" + std::to_string(eng() % 1000);
        s.actual_age = i % 3 == 0 ? std::floor(age(eng)) : age(eng);
        s.estimate = s.actual_age + noise(eng);
        const int k = tag_pick(eng);
        for (int t = 0; t < k && t < static_cast<int>(pool.size()); ++t) s.tags.insert(pool[(eng() % pool.size())]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("parse_prediction_log: minimal log") {
    const auto log = parse_prediction_log("sample_id,actual_age,estimate\ns1,16,17.3\n");
    REQUIRE(log.samples.size() == 1);
    CHECK(log.samples[0].sample_id == "s1");
    CHECK(log.samples[0].actual_age == 16.0);
    CHECK(log.samples[0].estimate == 17.3);
    CHECK(log.lines[0] == 2);
    const auto split = split_by_legal_age(log.samples, 18);
    REQUIRE(split.positives.size() == 1);
    CHECK(split.positives[0].is_positive);
    CHECK(split.positives[0].score == 17.3);
}

TEST_CASE("parse_prediction_log: CRLF, BOM, blank lines and tags") {
    const std::string text =
        "\xEF\xBB\xBFsample_id,actual_age,estimate,tags\r\n"
        "a,15,16.5,attack;low_quality\r\n"
        "\r\n"
        "b,30,29,\r\n"
        "c,17,18\r\n";
    const auto log = parse_prediction_log(text);
    REQUIRE(log.samples.size() == 3);
    CHECK(log.samples[0].tags == std::set<std::string, std::less<>>{"attack", "low_quality"});
    CHECK(log.samples[1].tags.empty());
    CHECK(log.lines == std::vector<std::size_t>{2, 4, 5});
}

TEST_CASE("parse_prediction_log: duplicate ids name both lines") {
    const std::string text = "sample_id,actual_age,estimate\nx,10,11\ny,12,13\nx,14,15\n";
    try {
        parse_prediction_log(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.errors().size() == 1);
        CHECK(e.errors()[0].kind == RowErrorKind::DuplicateId);
        CHECK(e.errors()[0].line == 4);
        CHECK(e.errors()[0].message.find("lines 2 and 4") != std::string::npos);
    }
}

TEST_CASE("parse_prediction_log: one NaN in a ten-row fixture") {
    std::string text = "sample_id,actual_age,estimate\n";
    for (int i = 0; i < 10; ++i) {
        text += "r" + std::to_string(i) + "," + std::to_string(10 + i) + "," +
                (i == 6 ? std::string("NaN") : std::to_string(11 + i) + ".5") + "\n";
    }
    try {
        parse_prediction_log(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.errors().size() == 1);
        CHECK(e.errors()[0].line == 8);
        CHECK(e.errors()[0].kind == RowErrorKind::NonFinite);
    }
    const auto lenient = parse_prediction_log(text, ParseMode::Lenient);
    CHECK(lenient.samples.size() == 9);
    REQUIRE(lenient.skipped.size() == 1);
    CHECK(lenient.skipped[0].line == 8);
}

TEST_CASE("parse_prediction_log: every row error is collected") {
    const std::string text =
        "sample_id,actual_age,estimate\n"
        "a,10\n"           // arity
        "b,ten,11\n"       // non-numeric
        "c,-1,11\n"        // negative age
        "d,10,inf\n"       // non-finite
        "e,10,11,extra\n"  // arity without a tags column
        "f,10,1e999\n"     // overflow
        "g,10,11\n";
    try {
        parse_prediction_log(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const auto& errs = e.errors();
        REQUIRE(errs.size() == 6);
        CHECK(errs[0].kind == RowErrorKind::BadArity);
        CHECK(errs[1].kind == RowErrorKind::NonNumeric);
        CHECK(errs[2].kind == RowErrorKind::NegativeAge);
        CHECK(errs[3].kind == RowErrorKind::NonFinite);
        CHECK(errs[4].kind == RowErrorKind::BadArity);
        CHECK(errs[5].kind == RowErrorKind::NonFinite);
        CHECK(errs[5].line == 7);
    }
    const auto lenient = parse_prediction_log(text, ParseMode::Lenient);
    REQUIRE(lenient.samples.size() == 1);
    CHECK(lenient.samples[0].sample_id == "g");
}

TEST_CASE("parse_prediction_log: header is mandatory in both modes") {
    CHECK_THROWS_AS(parse_prediction_log(""), ParseError);
    CHECK_THROWS_AS(parse_prediction_log("id,age,est\na,1,2\n", ParseMode::Lenient), ParseError);
    CHECK_THROWS_AS(parse_prediction_log("sample_id,actual_age,estimate,notes\n"), ParseError);
    CHECK(parse_prediction_log("sample_id,actual_age,estimate\n").samples.empty());
}

TEST_CASE("property: CSV write then parse is the identity") {
    std::mt19937_64 eng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto data = random_dataset(eng, std::uniform_int_distribution<std::size_t>(0, 200)(eng));
        const auto text = write_prediction_log(data);
        const auto back = parse_prediction_log(text);
        REQUIRE(back.samples == data);
        REQUIRE(write_prediction_log(back.samples) == text);
    }
}

TEST_CASE("write_prediction_log refuses unrepresentable values") {
    CHECK_THROWS_AS(write_prediction_log(Dataset{{"a,b", 1, 2, {}}}), DomainError);
    CHECK_THROWS_AS(write_prediction_log(Dataset{{"a", 1, NAN, {}}}), DomainError);
    CHECK_THROWS_AS(write_prediction_log(Dataset{{"a", 1, 2, {"x;y"}}}), DomainError);
}

TEST_CASE("rater files and aggregation") {
    const std::string text =
        "sample_id,actual_age,e1,e2,e3\n"
        "a,16,20,30\n"
        "b,15,10,11,12\n"
        "c,17,19,,\n";
    const auto file = parse_rater_file(text);
    REQUIRE(file.rows.size() == 3);
    CHECK(file.rows[2].estimates.size() == 1);

    const auto mean = aggregate_raters(file, AggregationPolicy::Mean);
    const auto worst = aggregate_raters(file, AggregationPolicy::WorstCase);
    CHECK(mean[0].estimate == 25.0);
    CHECK(worst[0].estimate == 30.0);
    CHECK(mean[1].estimate == 11.0);
    CHECK(worst[1].estimate == 12.0);
    CHECK(mean[2].estimate == 19.0);
    CHECK(mean[1].has_tag("raters=3"));
    CHECK(worst[2].has_tag("raters=1"));

    CHECK_THROWS_AS(parse_rater_file("sample_id,actual_age,e1\na,16\n"), ParseError);
    CHECK_THROWS_AS(parse_rater_file("sample_id,actual_age,e1\na,16,x\n"), ParseError);
    RaterFile empty_row;
    empty_row.rows.push_back({"z", 10, {}});
    CHECK_THROWS_AS(aggregate_raters(empty_row, AggregationPolicy::Mean), DomainError);
}

TEST_CASE("property: aggregation bounds") {
    std::mt19937_64 eng(32);
    std::uniform_real_distribution<double> est(0.0, 60.0);
    for (int trial = 0; trial < 200; ++trial) {
        RaterFile file;
        const std::size_t rows = 1 + eng() % 50;
        for (std::size_t r = 0; r < rows; ++r) {
            RaterRow row{"r" + std::to_string(r), 15, {}};
            const std::size_t k = 1 + eng() % 40;
            const double base = est(eng);
            for (std::size_t i = 0; i < k; ++i) {
                // Repeated values exercise the rounding edge of the mean.
                row.estimates.push_back(i % 2 ? base : base + est(eng) / 10.0);
            }
            file.rows.push_back(row);
        }
        const auto mean = aggregate_raters(file, AggregationPolicy::Mean);
        const auto worst = aggregate_raters(file, AggregationPolicy::WorstCase);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& e = file.rows[r].estimates;
            REQUIRE(*std::min_element(e.begin(), e.end()) <= mean[r].estimate);
            REQUIRE(mean[r].estimate <= *std::max_element(e.begin(), e.end()));
            REQUIRE(worst[r].estimate >= mean[r].estimate);
        }
    }
    // sum/n of three 0.1s is one ulp above 0.1 before clamping.
    RaterFile tenths;
    tenths.rows.push_back({"t", 10, {0.1, 0.1, 0.1}});
    CHECK(aggregate_raters(tenths, AggregationPolicy::Mean)[0].estimate == 0.1);
}

TEST_CASE("split_by_legal_age boundary and partition") {
    const Dataset edge{{"a", 17.9, 20, {}}, {"b", 18.0, 20, {}}};
    const auto s = split_by_legal_age(edge, 18);
    REQUIRE(s.positives.size() == 1);
    CHECK(s.positives[0].sample_id == "a");
    REQUIRE(s.negatives.size() == 1);
    CHECK(s.negatives[0].sample_id == "b");
    CHECK_THROWS_AS(split_by_legal_age(edge, 0), DomainError);

    std::mt19937_64 eng(33);
    std::uniform_real_distribution<double> legal(1.0, 60.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto data = random_dataset(eng, 300);
        const auto part = split_by_legal_age(data, legal(eng));
        REQUIRE(part.positives.size() + part.negatives.size() == data.size());
        std::set<std::string> ids;
        for (const auto& p : part.positives) ids.insert(p.sample_id);
        for (const auto& n : part.negatives) REQUIRE(!ids.contains(n.sample_id));
    }
}

TEST_CASE("split_by_legal_age on a Morph2-shaped population") {
    Dataset d;
    std::mt19937_64 eng(34);
    std::normal_distribution<double> noise(0.0, 4.0);
    auto add = [&](const std::string& prefix, int first, int last, int total) {
        for (int i = 0; i < total; ++i) {
            const double age = first + i % (last - first + 1);
            d.push_back({prefix + std::to_string(i), age, age + noise(eng), {}});
        }
    };
    add("young", 0, 11, 700);
    add("pos", 12, 17, 1550);
    add("neg", 18, 49, 5268);
    add("old", 50, 54, 300);
    Dataset in_range;
    std::copy_if(d.begin(), d.end(), std::back_inserter(in_range),
                 [](const Sample& s) { return s.actual_age >= 12 && s.actual_age <= 49; });
    const auto split = split_by_legal_age(in_range, 18);
    CHECK(split.positives.size() == 1550);
    CHECK(split.negatives.size() == 5268);
}
