#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "zerofail/cli.hpp"
#include "zerofail/core.hpp"
#include "zerofail/ingest.hpp"
#include "zerofail/report.hpp"
#include "zerofail/synth.hpp"
#include "zerofail/testsets.hpp"

namespace py = pybind11;
using namespace zerofail;

namespace {

std::optional<ReliabilityTarget> make_target(std::optional<double> confidence,
                                             std::optional<double> reliability) {
    if (!confidence && !reliability) return std::nullopt;
    if (!confidence || !reliability) {
        throw DomainError("confidence and reliability must be given together");
    }
    return ReliabilityTarget(*confidence, *reliability);
}

Format format_or_throw(const std::string& name) {
    auto f = parse_format(name);
    if (!f) throw DomainError("unknown format '" + name + "'");
    return *f;
}

}  // namespace

PYBIND11_MODULE(_zerofail, m) {
    m.doc() = "Zero-failure certification of score-based binary classifiers";
    m.attr("__version__") = std::string(tool_version());

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<LabeledScore>(m, "LabeledScore")
        .def(py::init<std::string, bool, double, double>(), py::arg("sample_id"),
             py::arg("is_positive"), py::arg("score"), py::arg("actual_age") = 0.0)
        .def_readwrite("sample_id", &LabeledScore::sample_id)
        .def_readwrite("is_positive", &LabeledScore::is_positive)
        .def_readwrite("score", &LabeledScore::score)
        .def_readwrite("actual_age", &LabeledScore::actual_age)
        .def("__repr__", [](const LabeledScore& s) {
            std::ostringstream os;
            os << "LabeledScore('" << s.sample_id << "', " << (s.is_positive ? "True" : "False")
               << ", " << s.score << ", " << s.actual_age << ")";
            return os.str();
        });

    py::class_<OperatingPoint>(m, "OperatingPoint")
        .def_readonly("threshold", &OperatingPoint::threshold)
        .def_readonly("k_allowed_failures", &OperatingPoint::k_allowed_failures)
        .def_readonly("source_sample_id", &OperatingPoint::source_sample_id)
        .def("raises_alarm", &OperatingPoint::raises_alarm);

    py::class_<TnrReport>(m, "TnrReport")
        .def_readonly("hysteresis_age", &TnrReport::hysteresis_age)
        .def_readonly("eligible_count", &TnrReport::eligible_count)
        .def_readonly("true_negative_count", &TnrReport::true_negative_count)
        .def_readonly("tnr", &TnrReport::tnr)
        .def("empty", &TnrReport::empty);

    py::class_<Sample>(m, "Sample")
        .def(py::init([](std::string id, double actual, double estimate, std::set<std::string> t) {
                 Sample s{std::move(id), actual, estimate, {}};
                 s.tags.insert(t.begin(), t.end());
                 return s;
             }),
             py::arg("sample_id"), py::arg("actual_age"), py::arg("estimate"),
             py::arg("tags") = std::set<std::string>{})
        .def_readwrite("sample_id", &Sample::sample_id)
        .def_readwrite("actual_age", &Sample::actual_age)
        .def_readwrite("estimate", &Sample::estimate)
        .def_property_readonly("tags", [](const Sample& s) {
            return std::set<std::string>(s.tags.begin(), s.tags.end());
        })
        .def(py::self == py::self);

    py::class_<MonteCarloSummary>(m, "MonteCarloSummary")
        .def_readonly("trials", &MonteCarloSummary::trials)
        .def_readonly("pass_count", &MonteCarloSummary::pass_count)
        .def_readonly("empirical_pass_rate", &MonteCarloSummary::empirical_pass_rate)
        .def_readonly("bound", &MonteCarloSummary::bound)
        .def_readonly("seed", &MonteCarloSummary::seed)
        .def("standard_error", &MonteCarloSummary::standard_error);

    m.def("required_sample_size",
          [](double confidence, double reliability) {
              const auto n = required_sample_size(ReliabilityTarget(confidence, reliability));
              return py::make_tuple(n.exact, n.ceiling);
          },
          py::arg("confidence"), py::arg("reliability"),
          "Returns (exact N, ceiling N) for a zero-failure demonstration.");
    m.def("achieved_confidence", &achieved_confidence, py::arg("n"), py::arg("reliability"));
    m.def("demonstrated_reliability", &demonstrated_reliability, py::arg("n"), py::arg("confidence"));

    m.def("zero_failure_threshold",
          [](const std::vector<LabeledScore>& p) { return zero_failure_threshold(p); },
          py::arg("positives"));
    m.def("k_failure_threshold",
          [](const std::vector<LabeledScore>& p, std::size_t k) { return k_failure_threshold(p, k); },
          py::arg("positives"), py::arg("k"));
    m.def("tnr_at",
          [](const std::vector<LabeledScore>& n, const OperatingPoint& op, double age) {
              return tnr_at(n, op, age);
          },
          py::arg("negatives"), py::arg("operating_point"), py::arg("hysteresis_age"));

    m.def("parse_prediction_log",
          [](const std::string& text, bool strict) {
              return parse_prediction_log(text, strict ? ParseMode::Strict : ParseMode::Lenient).samples;
          },
          py::arg("text"), py::arg("strict") = true);
    m.def("write_prediction_log",
          [](const std::vector<Sample>& samples) { return write_prediction_log(samples); },
          py::arg("samples"));
    m.def("aggregate_raters",
          [](const std::string& text, const std::string& policy, bool strict) {
              if (policy != "mean" && policy != "worst_case") {
                  throw DomainError("policy must be 'mean' or 'worst_case'");
              }
              const auto file = parse_rater_file(text, strict ? ParseMode::Strict : ParseMode::Lenient);
              return aggregate_raters(file, policy == "mean" ? AggregationPolicy::Mean
                                                             : AggregationPolicy::WorstCase);
          },
          py::arg("text"), py::arg("policy") = "mean", py::arg("strict") = true);
    m.def("split_by_legal_age",
          [](const std::vector<Sample>& samples, double legal_age) {
              auto s = split_by_legal_age(samples, legal_age);
              return py::make_tuple(s.positives, s.negatives);
          },
          py::arg("samples"), py::arg("legal_age") = 18.0);

    m.def("build_hierarchy",
          [](const std::vector<Sample>& positives, const std::vector<std::size_t>& sizes,
             std::uint64_t seed, double legal_age) {
              return build_hierarchy(positives, sizes, seed, legal_age).levels();
          },
          py::arg("positives"), py::arg("sizes"), py::arg("seed") = 0, py::arg("legal_age") = 18.0);

    m.def("generate",
          [](std::uint32_t per_year_positive, std::uint32_t per_year_negative, double sigma,
             double mean, std::uint64_t seed) {
              SyntheticDesign d;
              d.per_year_positive = per_year_positive;
              d.per_year_negative = per_year_negative;
              d.noise_sigma = sigma;
              d.noise_mean = mean;
              d.seed = seed;
              return generate(d);
          },
          py::arg("per_year_positive") = 10, py::arg("per_year_negative") = 100,
          py::arg("sigma") = 3.0, py::arg("mean") = 0.0, py::arg("seed") = 0);
    m.def("monte_carlo_pass_rate", &monte_carlo_pass_rate, py::arg("p_true"), py::arg("n"),
          py::arg("trials"), py::arg("seed") = 0);

    m.def("certify",
          [](const std::vector<LabeledScore>& positives, const std::vector<LabeledScore>& negatives,
             const std::vector<double>& hysteresis, std::optional<double> confidence,
             std::optional<double> reliability, const std::string& format,
             const std::string& timestamp) {
              CertifyOptions opts;
              opts.target = make_target(confidence, reliability);
              opts.timestamp = timestamp;
              return render(certify(positives, negatives, hysteresis, opts), format_or_throw(format));
          },
          py::arg("positives"), py::arg("negatives"),
          py::arg("hysteresis_ages") = std::vector<double>{18, 25, 30},
          py::arg("confidence") = py::none(), py::arg("reliability") = py::none(),
          py::arg("format") = "json", py::arg("timestamp") = "",
          "Certification report rendered in the requested format.");
    m.def("table1",
          [](std::uint64_t seed, const std::vector<double>& hysteresis, const std::string& format) {
              return render(table1_replica(seed, hysteresis), format_or_throw(format));
          },
          py::arg("seed") = 0, py::arg("hysteresis_ages") = std::vector<double>{18, 25},
          py::arg("format") = "json");

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out;
              std::ostringstream err;
              const int code = cli::run(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
