#!/usr/bin/env python3
"""Write synthetic date,close CSVs into data/ for trying the CLI.

Monthly series follow GBM with the drift/volatility pairs below; the weekly
series has Student-t(2) returns and fails the normality check.
"""

import argparse
import calendar
import datetime as dt
import math
import pathlib
import random

MONTHLY = {
    "GCB": (0.08499719, 0.2646442, 3.71),
    "GOIL": (-0.26525730, 0.3090071, 1.44),
    "TLW": (0.06631433, 0.1683587, 27.93),
    "TOTAL": (0.03200082, 0.1770301, 5.12),
    "UTB": (0.80071650, 0.4410409, 0.12),
}


def month_ends(start_year, count):
    y, m = start_year, 1
    for _ in range(count):
        yield dt.date(y, m, calendar.monthrange(y, m)[1])
        m += 1
        if m > 12:
            y, m = y + 1, 1


def write(path, dates, closes):
    with open(path, "w", newline="") as f:
        f.write("date,close\n")
        for d, c in zip(dates, closes):
            f.write(f"{d.isoformat()},{c:.4f}\n")


def gbm_closes(p0, mu, sigma, dt_years, n, rng):
    out = [p0]
    for _ in range(n - 1):
        z = rng.gauss(0.0, 1.0)
        out.append(out[-1] * math.exp((mu - 0.5 * sigma**2) * dt_years + sigma * math.sqrt(dt_years) * z))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data", type=pathlib.Path)
    ap.add_argument("--months", type=int, default=240)
    ap.add_argument("--seed", type=int, default=2016)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for i, (ticker, (mu, sigma, p0)) in enumerate(MONTHLY.items()):
        rng = random.Random(args.seed + i)
        dates = list(month_ends(2000, args.months))
        write(args.out / f"{ticker}.csv", dates, gbm_closes(p0, mu, sigma, 1 / 12, args.months, rng))

    rng = random.Random(args.seed - 1)
    start = dt.date(2010, 1, 1)
    dates = [start + dt.timedelta(weeks=k) for k in range(300)]
    closes = [3.0]
    for _ in dates[1:]:
        t = rng.gauss(0, 1) / math.sqrt(rng.gammavariate(1.0, 1.0))
        closes.append(closes[-1] * math.exp(0.02 * t))
    write(args.out / "HEAVY_weekly.csv", dates, closes)


if __name__ == "__main__":
    main()
