"""Cost metrics for predicted vs. experimental saturation pressures."""

from kij_bench.scorers.metrics import METRICS, MetricReport, PairedSeries, evaluate, score, spider_values

__all__ = ["METRICS", "MetricReport", "PairedSeries", "evaluate", "score", "spider_values"]
