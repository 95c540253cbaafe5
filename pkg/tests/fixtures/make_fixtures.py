#!/usr/bin/env python3
"""Regenerate the committed synthetic fixtures.

Deliberately independent of the package: every formula is written out
here so the fixtures can serve as oracles for the code under test.
Running this script overwrites the CSVs in this directory; outputs are
bit-stable because all randomness is seeded.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent

# logistic-curve fixture: 60 daily observations
CASE_ALPHA = 1.2
CASE_BETA = 0.8  # per week
CASE_T0 = 6.0  # weeks
CASE_SIGMA = 200.0
CASE_SEED = 42
CASE_START = dt.date(2020, 3, 1)
CASE_N = 60

# price fixtures: 300 trading days, noise sd 0.01
PRICE_START = dt.date(2019, 5, 1)
PRICE_N = 300
PRICE_NOISE_SD = 0.01
CORONA_START = dt.date(2020, 2, 18)
CORONA_END = dt.date(2020, 3, 25)
TICKERS = {
    "NEG": (-0.02, 7),
    "POS": (0.01, 8),
    "MID": (-0.005, 9),
}


def logistic_counts() -> tuple[list[dt.date], np.ndarray]:
    rng = np.random.default_rng(CASE_SEED)
    dates = [CASE_START + dt.timedelta(days=i) for i in range(CASE_N)]
    t = np.arange(CASE_N) / 7.0
    mu = CASE_ALPHA * 1e5 / (1.0 + np.exp(-CASE_BETA * (t - CASE_T0)))
    noisy = mu + CASE_SIGMA * rng.standard_normal(CASE_N)
    cumulative = np.maximum.accumulate(np.maximum(np.round(noisy), 0.0))
    return dates, cumulative


def write_synthetic_cases() -> None:
    dates, counts = logistic_counts()
    headers = ["Province/State", "Country/Region", "Lat", "Long"]
    headers += [f"{d.month}/{d.day}/{d.strftime('%y')}" for d in dates]
    row = ["", "Synthetia", "0.0", "0.0"] + [str(int(v)) for v in counts]
    text = ",".join(headers) + "\n" + ",".join(row) + "\n"
    (HERE / "synthetic_cases.csv").write_text(text)


def trading_days() -> list[dt.date]:
    days = []
    d = PRICE_START
    while len(days) < PRICE_N:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def write_prices() -> None:
    days = trading_days()
    for ticker, (shift, seed) in TICKERS.items():
        rng = np.random.default_rng(seed)
        noise = PRICE_NOISE_SD * rng.standard_normal(PRICE_N)
        in_window = np.array([CORONA_START <= d <= CORONA_END for d in days])
        returns = shift * in_window + noise
        prices = 100.0 * np.cumprod(1.0 + returns)
        lines = ["date,close"]
        # first row anchors the series one trading day before the returns start
        anchor = PRICE_START - dt.timedelta(days=1)
        while anchor.weekday() >= 5:
            anchor -= dt.timedelta(days=1)
        lines.append(f"{anchor.isoformat()},100.0")
        for d, p in zip(days, prices):
            lines.append(f"{d.isoformat()},{float(p)!r}")
        (HERE / f"{ticker}.csv").write_text("\n".join(lines) + "\n")


def write_windows() -> None:
    text = (
        "name,start,end\n"
        "crisis_2008,2008-01-01,2009-01-31\n"
        "down_turn_2018,2018-10-01,2019-01-03\n"
        "coronavirus,2020-02-18,2020-03-25\n"
    )
    (HERE / "windows.csv").write_text(text)


if __name__ == "__main__":
    write_synthetic_cases()
    write_prices()
    write_windows()
    days = trading_days()
    n_in = sum(1 for d in days if CORONA_START <= d <= CORONA_END)
    print(f"wrote fixtures; {n_in} of {PRICE_N} trading days inside the coronavirus window")
