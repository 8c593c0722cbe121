"""Analytic evaluator: butterfly SNMs, RC-limited delays, power and area."""

from .evaluate import (
    METRIC_NAMES,
    MetricsRecord,
    SnmFloors,
    evaluate,
    evaluate_batch,
    margin,
    pass_fail,
    read_delay,
    records_from_batch,
    slacks,
    write_delay,
)
from .snm import ButterflyCurve, cell_butterfly, inverter_vtc, snm, trip_point, write_margin
from .timing import cell_area, discharge_time

__all__ = [
    "METRIC_NAMES", "MetricsRecord", "SnmFloors", "ButterflyCurve", "cell_area", "cell_butterfly",
    "discharge_time", "evaluate", "evaluate_batch", "inverter_vtc", "margin", "pass_fail",
    "read_delay", "records_from_batch", "slacks", "snm", "trip_point", "write_delay", "write_margin",
]
