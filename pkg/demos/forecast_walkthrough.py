#!/usr/bin/env python3
"""Three-stage dynamic model on synthetic annual data, stage by stage.

Stage 1 fits each year's joint skew-normal volume / Laplace regression
model by random-walk Metropolis.  Stage 2 compresses each posterior to its
mean vector and fits a correlated Gaussian random walk to the year-to-year
increments (log-normal scales, LKJ(eta) correlation).  Stage 3 pushes the
last fitted state one step forward to get a predictive cloud for next
year's (volume, ratio) pairs.

The generating truth drifts linearly, so you can read recovery quality
directly off the table.  Runs in roughly half a minute at the default
sampler settings.

    python3 demos/forecast_walkthrough.py --years 6 --points 120
"""

import argparse

import numpy as np

from contagion import forecast


def synthesize(years: int, points: int, seed: int):
    """(year, language, log10_n, ratio) rows from a drifting truth."""
    rows = []
    truths = {}
    for t in range(years):
        year = 2009 + t
        truth = forecast.GlmState(
            mu=4.5 + 0.05 * t,
            tau=10.0,
            alpha=1.0,
            beta0=0.10 + 0.005 * t,
            beta1=0.040 + 0.002 * t,
            b=0.03,
        )
        truths[year] = truth
        rng = np.random.default_rng([seed, year])
        x = forecast.sample_skewnorm(rng, truth.mu, truth.tau ** -0.5, truth.alpha, points)
        r = truth.beta0 + truth.beta1 * x + rng.laplace(0.0, truth.b, points)
        rows.extend((year, "xx", float(xi), float(ri)) for xi, ri in zip(x, r))
    return rows, truths


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--years", type=int, default=6)
    ap.add_argument("--points", type=int, default=120, help="observations per year")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--chains", type=int, default=2)
    ap.add_argument("--warmup", type=int, default=2000)
    ap.add_argument("--draws", type=int, default=1000)
    args = ap.parse_args()

    rows, truths = synthesize(args.years, args.points, args.seed)
    config = forecast.SamplerConfig(
        seed=5, chains=args.chains, warmup=args.warmup, draws=args.draws
    )
    result = forecast.forecast_pipeline(rows, config)

    print("stage 1: per-year posteriors (slope beta1 vs generating truth)")
    print("%6s %10s %10s %10s %8s" % ("year", "truth", "mean", "sd", "|z|"))
    for fit in result.fits:
        truth = truths[fit.year].beta1
        mean = float(np.mean(fit.draws["beta1"]))
        sd = float(np.std(fit.draws["beta1"]))
        print("%6d %10.4f %10.4f %10.4f %8.2f"
              % (fit.year, truth, mean, sd, abs(mean - truth) / sd))

    print("\nstage 2: random walk over the pseudo-observation increments")
    print("  acceptance: %s" % ", ".join("%.3f" % a for a in result.walk.acceptance))
    sigma = result.walk.sigma.mean(axis=0)
    print("  posterior mean step scales:")
    for name, s in zip(forecast.PARAM_NAMES, sigma):
        print("    sigma_%-6s %.4f" % (name, s))

    bundle = result.bundle
    print("\nstage 3: one-year-ahead forecast for %d" % bundle.year)
    print("  state draws kept: %d  (rejected for positivity: %d)"
          % (bundle.n_draws, bundle.n_rejected))
    q = bundle.state_quantiles["beta1"]
    print("  beta1 quantiles: " + "  ".join(
        "%s=%.4f" % (k, q[k]) for k in ("q05", "q25", "q50", "q75", "q95")))
    pq = bundle.predictive_quantiles["ratio"]
    print("  predictive ratio: " + "  ".join(
        "%s=%.4f" % (k, pq[k]) for k in ("q05", "q50", "q95")))

    last = result.pseudo[-1].beta1
    frac = float(np.mean(bundle.state_draws["beta1"] > last))
    print("\nP(beta1 rises next year) = %.3f" % frac)
    print("a driftless random walk centers this near 1/2: the forecast widens")
    print("uncertainty but does not extrapolate the historical slope trend.")


if __name__ == "__main__":
    main()
