"""Zero-failure certification of score-based binary classifiers."""

from ._zerofail import (
    LabeledScore,
    MonteCarloSummary,
    OperatingPoint,
    ParseError,
    Sample,
    TnrReport,
    __version__,
    achieved_confidence,
    aggregate_raters,
    build_hierarchy,
    certify,
    demonstrated_reliability,
    generate,
    k_failure_threshold,
    monte_carlo_pass_rate,
    parse_prediction_log,
    required_sample_size,
    run_cli,
    split_by_legal_age,
    table1,
    tnr_at,
    write_prediction_log,
    zero_failure_threshold,
)

__all__ = [
    "LabeledScore",
    "MonteCarloSummary",
    "OperatingPoint",
    "ParseError",
    "Sample",
    "TnrReport",
    "__version__",
    "achieved_confidence",
    "aggregate_raters",
    "build_hierarchy",
    "certify",
    "demonstrated_reliability",
    "generate",
    "k_failure_threshold",
    "monte_carlo_pass_rate",
    "parse_prediction_log",
    "required_sample_size",
    "run_cli",
    "split_by_legal_age",
    "table1",
    "tnr_at",
    "write_prediction_log",
    "zero_failure_threshold",
]
