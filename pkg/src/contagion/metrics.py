"""Headline analytics over tally stores.

Core quantities per (day, language) cell, writing N_ot and N_rt for the
organic and retweeted counts and N_at = N_ot + N_rt:

    rates:  p_ot = N_ot / N_at,  p_rt = N_rt / N_at
    ratio:  R = N_rt / N_ot           (undefined when N_ot = 0)
    gain:   G = 10 log10(N_at / N_ot) = 10 log10(1 + R), in decibels

A ratio above 1 (equivalently a gain above 10 log10 2 ~ 3.0103 dB) means
retweeted copies outnumber organic messages: more than half the volume
is amplification.  Undefined cells are carried as None, never 0 or inf,
so bucket means stay honest.

Also here: rank / Zipf tables, Pareto fronts over (volume, gain), and
the annual export that feeds the forecasting stage.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

from .tally import (
    AGGREGATORS,
    RESOLUTIONS,
    BucketedSeries,
    TallyStore,
    bucket_start,
    rebucket,
)

METRICS = ("ratio", "gain", "p_ot", "p_rt")
METHODS = ("mean_of_daily", "ratio_of_sums")

CONTAGION_THRESHOLD_DB = 10.0 * math.log10(2.0)


@dataclass(frozen=True)
class RatePoint:
    p_ot: float
    p_rt: float


@dataclass(frozen=True)
class RankRow:
    rank: int
    language: str
    count: int


@dataclass(frozen=True)
class RankTable:
    """Languages ranked by total volume over a period.

    Counts are non-increasing; ties broken by language code.  zipf()
    re-expresses the same ordering as (rank, usage rate) pairs.
    """

    period: Tuple[Optional[dt.date], Optional[dt.date]]
    rows: Tuple[RankRow, ...]

    def zipf(self) -> Tuple[Tuple[int, float], ...]:
        total = sum(r.count for r in self.rows)
        if total == 0:
            return ()
        return tuple((r.rank, r.count / total) for r in self.rows)


def rates(f_ot: int, f_rt: int) -> Optional[RatePoint]:
    """Normalized organic / retweeted shares; None when the cell is empty."""
    f_at = f_ot + f_rt
    if f_at == 0:
        return None
    return RatePoint(f_ot / f_at, f_rt / f_at)


def contagion_ratio(f_ot: int, f_rt: int) -> Optional[float]:
    """R = N_rt / N_ot; None when there are no organic messages."""
    if f_ot == 0:
        return None
    return f_rt / f_ot


def gain(f_ot: int, f_rt: int) -> Optional[float]:
    """G = 10 log10(N_at / N_ot) dB; None when there are no organic messages."""
    if f_ot == 0:
        return None
    return 10.0 * math.log10((f_ot + f_rt) / f_ot)


def _daily_metric(f_ot: int, f_rt: int, metric: str) -> Optional[float]:
    if metric == "ratio":
        return contagion_ratio(f_ot, f_rt)
    if metric == "gain":
        return gain(f_ot, f_rt)
    point = rates(f_ot, f_rt)
    if point is None:
        return None
    return point.p_ot if metric == "p_ot" else point.p_rt


def daily_series(
    store: TallyStore, language: str, metric: str = "ratio"
) -> Tuple[Tuple[dt.date, Optional[float]], ...]:
    """One (date, value) point per observed day for a language.

    Undefined days (metric has no value for the cell) carry None; this is
    the raw input for rebucket and rolling_mean.
    """
    if metric not in METRICS:
        raise ValueError("unknown metric %r" % metric)
    return tuple(
        (c.date, _daily_metric(c.f_ot, c.f_rt, metric))
        for c in store.daily_counts(language)
    )


def aggregate_metric(
    store: TallyStore,
    language: str,
    resolution: str = "year",
    metric: str = "ratio",
    method: str = "mean_of_daily",
) -> BucketedSeries:
    """Bucketed metric series for one language.

    mean_of_daily (default) averages the defined daily values inside each
    bucket; ratio_of_sums first sums the counts over the bucket and applies
    the metric once.  The two agree when daily counts are proportional and
    diverge otherwise, which is why both are kept.
    """
    if metric not in METRICS:
        raise ValueError("unknown metric %r" % metric)
    if method not in METHODS:
        raise ValueError("unknown method %r" % method)
    if resolution not in RESOLUTIONS:
        raise ValueError("unknown resolution %r" % resolution)

    cells = store.daily_counts(language)
    if not cells:
        return BucketedSeries(resolution, ())

    if method == "mean_of_daily":
        daily = [(c.date, _daily_metric(c.f_ot, c.f_rt, metric)) for c in cells]
        return rebucket(daily, resolution, "mean")

    # ratio_of_sums: fold counts into buckets first.  Reuse rebucket's sum
    # path per component so bucket alignment stays in one place.
    ot_sums = rebucket([(c.date, float(c.f_ot)) for c in cells], resolution, "sum")
    rt_sums = rebucket([(c.date, float(c.f_rt)) for c in cells], resolution, "sum")
    points = []
    for (start, f_ot), (_, f_rt) in zip(ot_sums.points, rt_sums.points):
        if f_ot is None and f_rt is None:
            points.append((start, None))
            continue
        value = _daily_metric(int(f_ot or 0), int(f_rt or 0), metric)
        points.append((start, value))
    return BucketedSeries(resolution, tuple(points))


def rank_table(
    store: TallyStore,
    period: Tuple[Optional[dt.date], Optional[dt.date]] = (None, None),
) -> RankTable:
    """Rank languages by total message volume inside [start, end] inclusive."""
    start, end = period
    totals: dict[str, int] = {}
    for (date, lang), (f_ot, f_rt) in store.entries.items():
        if start is not None and date < start:
            continue
        if end is not None and date > end:
            continue
        totals[lang] = totals.get(lang, 0) + f_ot + f_rt
    ordered = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    rows = tuple(
        RankRow(rank, lang, count) for rank, (lang, count) in enumerate(ordered, 1)
    )
    return RankTable(period, rows)


def pareto_front(
    points: Iterable[Tuple[float, float, str]]
) -> Tuple[Tuple[float, float, str], ...]:
    """Non-dominated subset of (n_messages, gain_db, language) triples.

    A point is dominated if some other point is >= on both coordinates and
    > on at least one; exact duplicates survive together.  Output sorted
    by n_messages ascending.
    """
    pts = list(points)
    front = []
    for i, (n_i, g_i, _) in enumerate(pts):
        dominated = False
        for j, (n_j, g_j, _) in enumerate(pts):
            if j == i:
                continue
            if n_j >= n_i and g_j >= g_i and (n_j > n_i or g_j > g_i):
                dominated = True
                break
        if not dominated:
            front.append(pts[i])
    return tuple(sorted(front, key=lambda p: (p[0], p[1], p[2])))


def annual_glm_table(
    store: TallyStore, method: str = "mean_of_daily"
) -> Tuple[Tuple[int, str, float, float], ...]:
    """Per language-year rows (year, language, log10 N_at, annual ratio).

    This is the hand-off format to the forecasting stage, which models how
    a language's annual ratio scales with its volume.  Language-years with
    zero volume or an undefined ratio are dropped.
    """
    rows = []
    for lang in store.languages():
        cells = store.daily_counts(lang)
        series = aggregate_metric(store, lang, "year", "ratio", method)
        totals: dict[dt.date, int] = {}
        for cell in cells:
            key = bucket_start(cell.date, "year")
            totals[key] = totals.get(key, 0) + cell.f_at
        for start, ratio in series.points:
            n_at = totals.get(start, 0)
            if ratio is None or n_at == 0:
                continue
            rows.append((start.year, lang, math.log10(n_at), ratio))
    return tuple(sorted(rows))
