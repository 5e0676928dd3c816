"""Measure how much of each language's daily message volume is retweeted.

The pipeline: parse NDJSON message streams, split them into organic (OT)
and retweeted (RT) units, sanitize the text, identify its language, tally
counts per language per day, and derive contagion ratios, decibel gains,
rank tables and Pareto fronts. Two label sources can be compared head to
head, and annual (volume, ratio) observations feed a Bayesian dynamic GLM
that forecasts the next year.
"""

__version__ = "0.1.0"

from . import compare, forecast, ingest, lid, metrics, sanitize, tally  # noqa: F401
