"""Regenerate the bundled synthetic OHLC sample CSV.

Produces a deterministic random-walk price series shaped like daily equity
bars (date, open, high, low, close): log-price drift with occasional
volatility regime switches, so the stream is mildly nonstationary the way
real price data is.  Values are rounded to cents.  Run from the repo root:

    python scripts/gen_sample_data.py
"""

from __future__ import annotations

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np

N_DAYS = 1200
SEED = 20160104

OUT = Path(__file__).resolve().parent.parent / "src" / "osgpcp" / "data" / "sample_ohlc.csv"


def main() -> None:
    rng = np.random.default_rng(SEED)
    # volatility regime switches every ~200 trading days
    daily_vol = np.repeat(rng.uniform(0.008, 0.025, size=N_DAYS // 200 + 1), 200)[:N_DAYS]
    log_ret = 0.0006 + daily_vol * rng.standard_normal(N_DAYS)
    close = 100.0 * np.exp(np.cumsum(log_ret))

    prev_close = np.concatenate([[100.0], close[:-1]])
    open_ = prev_close * (1.0 + 0.3 * daily_vol * rng.standard_normal(N_DAYS))
    # independent wick noises, so close is not a deterministic function of (o, h, l)
    up_wick = np.abs(daily_vol * rng.standard_normal(N_DAYS))
    down_wick = np.abs(daily_vol * rng.standard_normal(N_DAYS))
    high = np.maximum(open_, close) * (1.0 + up_wick)
    low = np.minimum(open_, close) * (1.0 - down_wick)

    day = date(2016, 1, 4)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "open", "high", "low", "close"])
        for i in range(N_DAYS):
            while day.weekday() >= 5:
                day += timedelta(days=1)
            writer.writerow([
                day.isoformat(),
                f"{open_[i]:.2f}", f"{high[i]:.2f}", f"{low[i]:.2f}", f"{close[i]:.2f}",
            ])
            day += timedelta(days=1)
    print(f"wrote {N_DAYS} rows to {OUT}")


if __name__ == "__main__":
    main()
