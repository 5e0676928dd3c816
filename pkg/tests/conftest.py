"""Shared fixtures: paths and the synthetic trend used by the forecast tests."""

import pathlib

import numpy as np
import pytest

from contagion import forecast

REPO = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

TREND_YEARS = tuple(range(2009, 2020))


def trend_truth(year: int) -> dict:
    """Generating parameters of the drifting-trend fixture for one year."""
    t = year - 2009
    return {
        "mu": 4.5 + 0.05 * t,
        "tau": 10.0,
        "alpha": 1.0,
        "beta0": 0.10 + 0.005 * t,
        "beta1": 0.040 + 0.002 * t,
        "b": 0.03,
    }


def trend_rows(points_per_year: int = 150):
    """(year, language, log10_n, ratio) rows with linearly drifting truth.

    Deterministic: each year draws from rng([2024, year]), volumes first,
    then the regression noise, so the committed CSV fixture and every test
    see byte-identical data.
    """
    rows = []
    for year in TREND_YEARS:
        p = trend_truth(year)
        rng = np.random.default_rng([2024, year])
        x = forecast.sample_skewnorm(
            rng, p["mu"], p["tau"] ** -0.5, p["alpha"], size=points_per_year
        )
        r = p["beta0"] + p["beta1"] * x + rng.laplace(0.0, p["b"], size=points_per_year)
        rows.extend((year, "en", float(xi), float(ri)) for xi, ri in zip(x, r))
    return rows


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mini_ndjson() -> pathlib.Path:
    return FIXTURES / "mini.ndjson"


@pytest.fixture(scope="session")
def annual_tally_csv() -> pathlib.Path:
    return FIXTURES / "annual_2019_tally.csv"


@pytest.fixture(scope="session")
def glm_input_csv() -> pathlib.Path:
    return FIXTURES / "glm_input_2009_2019.csv"
