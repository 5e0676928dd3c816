#!/usr/bin/env python3
"""Contagion arithmetic on a hand-built year of tallies.

Shows the two aggregation conventions side by side (mean of daily ratios
vs. ratio of summed counts), the decibel gain scale, the rank table with
its deterministic tie rule, the rank-frequency (Zipf) view, and the Pareto
front over (total volume, gain).

    python3 demos/contagion_metrics.py
"""

import argparse
import datetime as dt
import random

from contagion import metrics, tally
from contagion.ingest import OT, RT

# annual profile per language: (mean organic per day, mean retweet per day)
PROFILES = {
    "th": (100, 729),   # heavy amplification
    "pt": (120, 160),
    "es": (200, 210),
    "en": (500, 450),
    "ja": (300, 240),
    "fi": (126, 33),    # mostly organic
}


def build_store(jitter: float, seed: int) -> tally.TallyStore:
    rng = random.Random(seed)
    store = tally.TallyStore(source="demo")
    for day in range(365):
        date = dt.date(2019, 1, 1) + dt.timedelta(days=day)
        for lang, (ot_rate, rt_rate) in PROFILES.items():
            # day-to-day noise; jitter 0 reproduces the profile exactly
            f_ot = max(1, round(ot_rate * (1 + jitter * rng.uniform(-1, 1))))
            f_rt = round(rt_rate * (1 + jitter * rng.uniform(-1, 1)))
            store.add(date, lang, OT, f_ot)
            store.add(date, lang, RT, f_rt)
    return store


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jitter", type=float, default=0.3,
                    help="relative daily noise (0 = exact profile)")
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    store = build_store(args.jitter, args.seed)

    print("%-5s %10s %12s %10s %10s" % ("lang", "mean_daily", "ratio_sums", "gain_db", "flagged"))
    for lang in sorted(store.languages()):
        mean_daily = metrics.aggregate_metric(store, lang, "year", "ratio", "mean_of_daily")
        ratio_sums = metrics.aggregate_metric(store, lang, "year", "ratio", "ratio_of_sums")
        gain = metrics.aggregate_metric(store, lang, "year", "gain", "mean_of_daily")
        flagged = "yes" if gain.values()[0] > metrics.CONTAGION_THRESHOLD_DB else ""
        print("%-5s %10.4f %12.4f %10.4f %10s"
              % (lang, mean_daily.values()[0], ratio_sums.values()[0], gain.values()[0], flagged))
    print("\nthe two conventions agree when daily counts are proportional and"
          "\ndrift apart as the day-to-day mix varies (raise --jitter to see).")

    table = metrics.rank_table(store)
    print("\nrank table (by total volume; ties break on language code):")
    for row in table.rows[:4]:
        print("  #%d %-5s n=%d" % (row.rank, row.language, row.count))

    print("\nZipf points (rank, usage share):",
          " ".join("(%d, %.4f)" % p for p in table.zipf()[:4]))

    triples = []
    for row in table.rows:
        gain = metrics.aggregate_metric(store, row.language, "year", "gain",
                                        "mean_of_daily").values()[0]
        triples.append((float(row.count), gain, row.language))
    front = metrics.pareto_front(triples)
    print("\nPareto front over (volume, gain): nobody on the front is beaten")
    print("on both coordinates by any other language.")
    for n, gain, lang in front:
        print("  %-5s n=%-9d gain=%.4f dB" % (lang, int(n), gain))


if __name__ == "__main__":
    main()
