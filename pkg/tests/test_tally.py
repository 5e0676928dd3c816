"""Tally store, merge monoid, CSV interchange, and calendar bucketing tests."""

import datetime as dt
import io
import random

import pytest

from contagion import tally
from contagion.ingest import OT, RT, CategorizedMessage
from contagion.tally import TallyStore

D = dt.date


def _msg(ts: int, category: str, ident: str = "m") -> CategorizedMessage:
    return CategorizedMessage(id=ident, ts=ts, kind="tweet", text="x", category=category)


def _random_store(rnd: random.Random) -> TallyStore:
    store = TallyStore()
    for _ in range(rnd.randrange(0, 12)):
        date = D(2019, rnd.randrange(1, 13), rnd.randrange(1, 28))
        lang = rnd.choice(["en", "es", "th", "fi", "und"])
        store.add(date, lang, OT, rnd.randrange(0, 5))
        store.add(date, lang, RT, rnd.randrange(0, 5))
    if rnd.random() < 0.3:
        store.count_error("bad_json", rnd.randrange(1, 4))
    return store


# -- accumulate --------------------------------------------------------------


def test_accumulate_ot():
    store = TallyStore()
    tally.accumulate(store, _msg(1559347200, OT), "en")  # 2019-06-01 UTC
    assert store.get(D(2019, 6, 1), "en") == (1, 0)


def test_accumulate_rt_twice():
    store = TallyStore()
    for _ in range(2):
        tally.accumulate(store, _msg(1559347200, RT), "th")
    assert store.get(D(2019, 6, 1), "th") == (0, 2)


def test_accumulate_utc_midnight_straddle():
    store = TallyStore()
    tally.accumulate(store, _msg(1559433599, OT), "en")
    tally.accumulate(store, _msg(1559433600, OT), "en")
    assert store.get(D(2019, 6, 1), "en") == (1, 0)
    assert store.get(D(2019, 6, 2), "en") == (1, 0)


def test_no_empty_cells_persisted():
    store = TallyStore()
    store.add(D(2019, 1, 1), "en", OT, 0)
    assert len(store) == 0
    with pytest.raises(ValueError):
        store.add(D(2019, 1, 1), "en", OT, -1)


def test_day_tally_f_at_derived():
    cell = tally.DayTally(D(2019, 1, 1), "en", 3, 4)
    assert cell.f_at == 7


# -- merge monoid ------------------------------------------------------------


def test_merge_identity():
    rnd = random.Random(1)
    for _ in range(50):
        store = _random_store(rnd)
        assert tally.merge(store, TallyStore()) == store
        assert tally.merge(TallyStore(), store) == store


def test_merge_commutative_and_associative():
    rnd = random.Random(2)
    for _ in range(300):
        a, b, c = _random_store(rnd), _random_store(rnd), _random_store(rnd)
        assert tally.merge(a, b) == tally.merge(b, a)
        assert tally.merge(a, tally.merge(b, c)) == tally.merge(tally.merge(a, b), c)


def test_merge_sums_cells_and_errors():
    a, b = TallyStore(source="a"), TallyStore(source="b")
    a.add(D(2019, 1, 1), "en", OT, 2)
    a.count_error("bad_json", 1)
    b.add(D(2019, 1, 1), "en", RT, 3)
    b.count_error("bad_json", 2)
    merged = tally.merge(a, b)
    assert merged.get(D(2019, 1, 1), "en") == (2, 3)
    assert merged.errors == {"bad_json": 3}
    assert merged.source == "a+b"


def test_conservation_on_fixture(mini_ndjson):
    with open(mini_ndjson, "rb") as fh:
        lines = fh.read().splitlines(keepends=True)
    store = tally.ingest_tally(lines, lambda part: "xx", source="mini")
    assert store.total_messages() == 26
    assert store.error_total == 5
    assert store.total_messages() + store.error_total == 31


# -- CSV interchange ---------------------------------------------------------


def test_csv_roundtrip():
    rnd = random.Random(3)
    for _ in range(20):
        store = _random_store(rnd)
        store.errors.clear()  # errors are run metadata, not part of the file
        buf = io.StringIO()
        tally.save_csv(store, buf)
        clone = tally.load_csv(io.StringIO(buf.getvalue()))
        assert clone == store


def test_csv_rows_sorted():
    store = TallyStore()
    store.add(D(2019, 2, 1), "th", OT)
    store.add(D(2019, 1, 1), "en", OT)
    store.add(D(2019, 1, 1), "aa", RT)
    buf = io.StringIO()
    tally.save_csv(store, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "date,language,f_ot,f_rt"
    assert lines[1:] == ["2019-01-01,aa,0,1", "2019-01-01,en,1,0", "2019-02-01,th,1,0"]


def test_load_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        tally.load_csv(io.StringIO("day,lang,a,b\n"))


def test_load_csv_rejects_negative_counts():
    text = "date,language,f_ot,f_rt\n2019-01-01,en,-1,0\n"
    with pytest.raises(ValueError, match="line 2"):
        tally.load_csv(io.StringIO(text))


def test_load_csv_rejects_malformed_row():
    text = "date,language,f_ot,f_rt\n2019-01-01,en,1\n"
    with pytest.raises(ValueError, match="line 2"):
        tally.load_csv(io.StringIO(text))


# -- calendar bucketing ------------------------------------------------------


def test_bucket_start_rules():
    assert tally.bucket_start(D(2019, 2, 15), "quarter") == D(2019, 1, 1)
    assert tally.bucket_start(D(2019, 6, 5), "week") == D(2019, 6, 3)  # Wed -> Mon
    assert tally.bucket_start(D(2019, 12, 31), "year") == D(2019, 1, 1)
    assert tally.bucket_start(D(2019, 6, 15), "month") == D(2019, 6, 1)
    assert tally.bucket_start(D(2019, 6, 15), "day") == D(2019, 6, 15)
    # ISO week can start in the previous year
    assert tally.bucket_start(D(2021, 1, 1), "week") == D(2020, 12, 28)


def test_rebucket_constant_month_means():
    days = [(D(2019, 1, 1) + dt.timedelta(n), 7.29) for n in range(90)]
    series = tally.rebucket(days, "month", "mean")
    assert [v for _, v in series.points] == [7.29, 7.29, 7.29]


def test_rebucket_sum_over_january():
    days = [(D(2019, 1, 1) + dt.timedelta(n), 1.0) for n in range(31)]
    series = tally.rebucket(days, "month", "sum")
    assert series.points == ((D(2019, 1, 1), 31.0),)


def test_rebucket_exact_constant_year_mean():
    # 365 equal values must average to exactly that value, no float drift
    days = [(D(2019, 1, 1) + dt.timedelta(n), 7.29) for n in range(365)]
    series = tally.rebucket(days, "year", "mean")
    assert series.points == ((D(2019, 1, 1), 7.29),)


def test_rebucket_gap_bucket_is_none():
    days = [(D(2019, 1, 10), 1.0), (D(2019, 3, 10), 3.0)]
    series = tally.rebucket(days, "month", "mean")
    assert series.points == (
        (D(2019, 1, 1), 1.0),
        (D(2019, 2, 1), None),
        (D(2019, 3, 1), 3.0),
    )


def test_rebucket_ignores_missing_days():
    days = [(D(2019, 1, 1), 2.0), (D(2019, 1, 2), None), (D(2019, 1, 3), 4.0)]
    series = tally.rebucket(days, "month", "mean")
    assert series.points == ((D(2019, 1, 1), 3.0),)


def test_rebucket_requires_strictly_increasing():
    days = [(D(2019, 1, 2), 1.0), (D(2019, 1, 1), 2.0)]
    with pytest.raises(ValueError):
        tally.rebucket(days, "month")
    with pytest.raises(ValueError):
        tally.rebucket([(D(2019, 1, 1), 1.0)] * 2, "month")


def test_rebucket_validates_arguments():
    with pytest.raises(ValueError):
        tally.rebucket([], "fortnight")
    with pytest.raises(ValueError):
        tally.rebucket([], "month", "median")
    assert tally.rebucket([], "month").points == ()


def test_bucketed_series_values():
    series = tally.rebucket([(D(2019, 1, 1), 1.0), (D(2019, 1, 2), 3.0)], "month")
    assert series.resolution == "month"
    assert series.values() == (2.0,)


# -- rolling mean ------------------------------------------------------------


def test_rolling_mean_examples():
    week = [(D(2019, 1, 1) + dt.timedelta(n), float(n + 1)) for n in range(7)]
    out = tally.rolling_mean(week, 7)
    assert out[-1] == (D(2019, 1, 7), 4.0)
    assert tally.rolling_mean(week, 1) == tuple(week)
    const = [(D(2019, 1, 1) + dt.timedelta(n), 2.5) for n in range(10)]
    assert all(v == 2.5 for _, v in tally.rolling_mean(const, 3))


def test_rolling_mean_skips_missing_days():
    series = [(D(2019, 1, 1), 1.0), (D(2019, 1, 2), None), (D(2019, 1, 3), 5.0)]
    out = dict(tally.rolling_mean(series, 2))
    assert out[D(2019, 1, 1)] == 1.0
    assert out[D(2019, 1, 2)] == 1.0  # window holds only day 1
    assert out[D(2019, 1, 3)] == 5.0  # day 2 contributes nothing


def test_rolling_mean_none_when_window_empty():
    series = [(D(2019, 1, 1), 1.0), (D(2019, 1, 2), None), (D(2019, 1, 3), None),
              (D(2019, 1, 4), None), (D(2019, 1, 5), 2.0)]
    out = dict(tally.rolling_mean(series, 2))
    assert out[D(2019, 1, 3)] is None
    assert out[D(2019, 1, 4)] is None
    assert out[D(2019, 1, 5)] == 2.0


def test_rolling_mean_fills_calendar_gaps():
    series = [(D(2019, 1, 1), 1.0), (D(2019, 1, 4), 4.0)]
    out = tally.rolling_mean(series, 2)
    assert [d for d, _ in out] == [D(2019, 1, 1) + dt.timedelta(n) for n in range(4)]
    assert dict(out)[D(2019, 1, 3)] is None


def test_rolling_mean_validates_window():
    with pytest.raises(ValueError):
        tally.rolling_mean([(D(2019, 1, 1), 1.0)], 0)


# -- store summaries ---------------------------------------------------------


def test_span_languages_daily_counts():
    store = TallyStore()
    store.add(D(2019, 3, 1), "en", OT, 2)
    store.add(D(2019, 1, 1), "th", RT, 1)
    assert store.span() == (D(2019, 1, 1), D(2019, 3, 1))
    assert store.languages() == ("en", "th")
    (cell,) = store.daily_counts("en")
    assert (cell.f_ot, cell.f_rt) == (2, 0)
    assert TallyStore().span() is None
