"""Per-day, per-language message counters.

The tally layer sits between ingestion and analytics.  A TallyStore maps
(day, language) to a pair of organic / retweeted counts.  Stores form a
commutative monoid under merge, which is what makes shard-then-merge
ingestion safe: any partition of the input stream, tallied independently
and merged in any order, yields the same store as a single pass.

Also here: calendar re-bucketing (day/week/month/quarter/year) and a
trailing rolling mean over daily series, both of which operate on plain
(date, value) sequences so the analytics layer can reuse them for any
derived quantity.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence, TextIO, Tuple

from .ingest import OT, RT, CategorizedMessage, ParseStats, categorize, parse_ndjson

RESOLUTIONS = ("day", "week", "month", "quarter", "year")
AGGREGATORS = ("mean", "sum")

CSV_HEADER = ("date", "language", "f_ot", "f_rt")

DailyPoint = Tuple[dt.date, Optional[float]]


@dataclass(frozen=True)
class DayTally:
    """Counts for one (day, language) cell.  f_at is derived, never stored."""

    date: dt.date
    language: str
    f_ot: int
    f_rt: int

    @property
    def f_at(self) -> int:
        return self.f_ot + self.f_rt


@dataclass(frozen=True)
class BucketedSeries:
    """A calendar-aligned series: (bucket start, value or None) pairs.

    Buckets are contiguous from the first to the last observed day; empty
    buckets carry None rather than being dropped, so consumers can tell
    "no data" from "zero".
    """

    resolution: str
    points: Tuple[Tuple[dt.date, Optional[float]], ...]

    def values(self) -> Tuple[Optional[float], ...]:
        return tuple(v for _, v in self.points)


class TallyStore:
    """Mergeable (day, language) -> (f_ot, f_rt) counter map.

    Cells never persist at (0, 0): incrementing by zero is a no-op and
    exports skip nothing because nothing empty is ever stored.
    """

    def __init__(self, source: str = "") -> None:
        self.entries: dict[Tuple[dt.date, str], list[int]] = {}
        self.errors: dict[str, int] = {}
        self.source = source

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TallyStore):
            return NotImplemented
        return (
            {k: tuple(v) for k, v in self.entries.items()}
            == {k: tuple(v) for k, v in other.entries.items()}
            and self.errors == other.errors
        )

    def add(self, date: dt.date, language: str, category: str, n: int = 1) -> None:
        if n < 0:
            raise ValueError("count increments must be nonnegative")
        if n == 0:
            return
        cell = self.entries.setdefault((date, language), [0, 0])
        cell[0 if category == OT else 1] += n

    def count_error(self, key: str, n: int = 1) -> None:
        if n:
            self.errors[key] = self.errors.get(key, 0) + n

    @property
    def error_total(self) -> int:
        return sum(self.errors.values())

    def get(self, date: dt.date, language: str) -> Tuple[int, int]:
        cell = self.entries.get((date, language))
        return (cell[0], cell[1]) if cell else (0, 0)

    def languages(self) -> Tuple[str, ...]:
        return tuple(sorted({lang for _, lang in self.entries}))

    def span(self) -> Optional[Tuple[dt.date, dt.date]]:
        """(first, last) observed day across all languages, or None if empty."""
        if not self.entries:
            return None
        days = [d for d, _ in self.entries]
        return min(days), max(days)

    def rows(self) -> Iterator[DayTally]:
        """All cells as DayTally records, sorted by (date, language)."""
        for (date, lang) in sorted(self.entries):
            f_ot, f_rt = self.entries[(date, lang)]
            yield DayTally(date, lang, f_ot, f_rt)

    def daily_counts(self, language: str) -> Tuple[DayTally, ...]:
        """This language's cells only, sorted by date."""
        picked = sorted(
            (date, lang) for (date, lang) in self.entries if lang == language
        )
        return tuple(
            DayTally(date, lang, *self.entries[(date, lang)]) for date, lang in picked
        )

    def total_messages(self) -> int:
        return sum(c[0] + c[1] for c in self.entries.values())


def accumulate(store: TallyStore, msg: CategorizedMessage, label: str) -> TallyStore:
    """Count one categorized message under `label` on its UTC day."""
    store.add(msg.day(), label, msg.category)
    return store


def merge(a: TallyStore, b: TallyStore) -> TallyStore:
    """Entrywise sum of two stores; error counters sum as well."""
    if a.source and b.source and a.source != b.source:
        source = "%s+%s" % (a.source, b.source)
    else:
        source = a.source or b.source
    out = TallyStore(source=source)
    for store in (a, b):
        for key, (f_ot, f_rt) in store.entries.items():
            cell = out.entries.setdefault(key, [0, 0])
            cell[0] += f_ot
            cell[1] += f_rt
        for key, n in store.errors.items():
            out.count_error(key, n)
    return out


def ingest_tally(
    lines: Iterable,
    labeler: Callable[[CategorizedMessage], str],
    source: str = "",
    stats: Optional[ParseStats] = None,
) -> TallyStore:
    """Parse an NDJSON stream, categorize, label and tally it in one pass.

    `labeler` maps each categorized message to a language code; parse
    errors land in the store's error counters so the conservation check
    (#input records = tallied + skipped) stays auditable.
    """
    stats = stats if stats is not None else ParseStats()
    store = TallyStore(source=source)
    for record in parse_ndjson(lines, stats=stats):
        for part in categorize(record):
            accumulate(store, part, labeler(part))
    for key, n in stats.errors.items():
        store.count_error(key, n)
    return store


def save_csv(store: TallyStore, fh: TextIO) -> None:
    """Write the store as `date,language,f_ot,f_rt`, sorted by (date, language)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in store.rows():
        writer.writerow((row.date.isoformat(), row.language, row.f_ot, row.f_rt))


def load_csv(fh: TextIO, source: str = "") -> TallyStore:
    """Inverse of save_csv.  Raises ValueError on a malformed file."""
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty tally file") from None
    if tuple(header) != CSV_HEADER:
        raise ValueError("bad tally header: %r" % (header,))
    store = TallyStore(source=source)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ValueError("line %d: expected 4 fields, got %d" % (lineno, len(row)))
        try:
            date = dt.date.fromisoformat(row[0])
            f_ot, f_rt = int(row[2]), int(row[3])
        except ValueError as exc:
            raise ValueError("line %d: %s" % (lineno, exc)) from None
        if f_ot < 0 or f_rt < 0:
            raise ValueError("line %d: negative count" % lineno)
        store.add(date, row[1], OT, f_ot)
        store.add(date, row[1], RT, f_rt)
    return store


def bucket_start(date: dt.date, resolution: str) -> dt.date:
    """Aligned start of the bucket containing `date`.

    Weeks are ISO (Monday start); months, quarters and years follow the
    civil calendar, all in UTC.
    """
    if resolution == "day":
        return date
    if resolution == "week":
        return date - dt.timedelta(days=date.weekday())
    if resolution == "month":
        return date.replace(day=1)
    if resolution == "quarter":
        month = 3 * ((date.month - 1) // 3) + 1
        return date.replace(month=month, day=1)
    if resolution == "year":
        return date.replace(month=1, day=1)
    raise ValueError("unknown resolution %r" % resolution)


def _next_bucket(start: dt.date, resolution: str) -> dt.date:
    if resolution == "day":
        return start + dt.timedelta(days=1)
    if resolution == "week":
        return start + dt.timedelta(days=7)
    if resolution == "month":
        year, month = divmod(start.month, 12)
        return dt.date(start.year + year, month + 1, 1)
    if resolution == "quarter":
        year, month0 = divmod(start.month - 1 + 3, 12)
        return dt.date(start.year + year, month0 + 1, 1)
    if resolution == "year":
        return dt.date(start.year + 1, 1, 1)
    raise ValueError("unknown resolution %r" % resolution)


def _mean(values: Sequence[float]) -> float:
    # fsum keeps bucket means exact for constant series (pairwise
    # summation in numpy drifts by an ulp on e.g. 365 copies of 7.29).
    return math.fsum(values) / len(values)


def rebucket(
    series: Sequence[DailyPoint], resolution: str, aggregator: str = "mean"
) -> BucketedSeries:
    """Group a sorted daily series into aligned calendar buckets.

    Missing days (value None) never contribute; a bucket with no defined
    values comes out as None.  `aggregator` is "mean" or "sum".
    """
    if resolution not in RESOLUTIONS:
        raise ValueError("unknown resolution %r" % resolution)
    if aggregator not in AGGREGATORS:
        raise ValueError("unknown aggregator %r" % aggregator)
    if not series:
        return BucketedSeries(resolution, ())
    dates = [d for d, _ in series]
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise ValueError("daily series must be strictly increasing in date")

    grouped: dict[dt.date, list[float]] = {}
    for date, value in series:
        if value is None:
            continue
        grouped.setdefault(bucket_start(date, resolution), []).append(float(value))

    points = []
    start = bucket_start(dates[0], resolution)
    stop = bucket_start(dates[-1], resolution)
    while True:
        values = grouped.get(start)
        if not values:
            agg: Optional[float] = None
        elif aggregator == "mean":
            agg = _mean(values)
        else:
            agg = math.fsum(values)
        points.append((start, agg))
        if start == stop:
            break
        start = _next_bucket(start, resolution)
    return BucketedSeries(resolution, tuple(points))


def rolling_mean(series: Sequence[DailyPoint], window_days: int) -> Tuple[DailyPoint, ...]:
    """Trailing mean over the previous `window_days` days including today.

    Emits one point per calendar day from the first to the last date in
    the input; a day whose window holds no defined values yields None.
    """
    if window_days < 1:
        raise ValueError("window_days must be >= 1")
    if not series:
        return ()
    dates = [d for d, _ in series]
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise ValueError("daily series must be strictly increasing in date")
    by_date = {d: v for d, v in series if v is not None}

    out = []
    day = dates[0]
    while day <= dates[-1]:
        window = [
            by_date[day - dt.timedelta(days=k)]
            for k in range(window_days)
            if day - dt.timedelta(days=k) in by_date
        ]
        out.append((day, _mean(window) if window else None))
        day += dt.timedelta(days=1)
    return tuple(out)
