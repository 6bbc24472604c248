"""Synthetic minute-bar fixtures.

Real vendor data cannot be bundled, so tests and demos run on generated
two-session days: a small Gaussian percent-change walk with occasional
clustered down-moves large enough to cross the default 0.1% jump
threshold.  Deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date, datetime, timedelta

import numpy as np

from .market_data import BarSeries, SessionCalendar, write_bars_csv
from .seeding import substream


def session_minutes(calendar: SessionCalendar, day: date) -> list[datetime]:
    """Bar timestamps of one trading day: every minute after each session
    open through the session close (the open minute itself has no bar)."""
    stamps = []
    for open_t, close_t in calendar.sessions:
        t = datetime.combine(day, open_t) + timedelta(minutes=1)
        end = datetime.combine(day, close_t)
        while t <= end:
            stamps.append(t)
            t += timedelta(minutes=1)
    return stamps


def synthetic_bars(
    days: int = 5,
    seed: int = 7,
    start: date = date(2021, 1, 4),
    calendar: SessionCalendar | None = None,
    base_price: float = 5000.0,
    noise_pct: float = 0.05,
    burst_prob: float = 0.01,
) -> BarSeries:
    """Minute bars over ``days`` consecutive synthetic trading days.

    With probability ``burst_prob`` per minute a cluster of 2-4 consecutive
    drops of 0.1%-0.3% begins, seeding windows where the jump labeler finds
    the positive class.
    """
    calendar = calendar or SessionCalendar()
    rng = substream(seed)
    stamps: list[datetime] = []
    closes: list[float] = []
    price = base_price
    day = start
    burst_left = 0
    for _ in range(days):
        for ts in session_minutes(calendar, day):
            if burst_left > 0:
                change = -float(rng.uniform(0.1, 0.3))
                burst_left -= 1
            else:
                change = float(rng.normal(0.0, noise_pct))
                if rng.uniform() < burst_prob:
                    burst_left = int(rng.integers(2, 5))
            price *= 1.0 + change / 100.0
            stamps.append(ts)
            closes.append(price)
        day += timedelta(days=1)
    return BarSeries.build(stamps, closes, calendar)


def single_day_bars(closes=None, day: date = date(2021, 1, 4),
                    calendar: SessionCalendar | None = None) -> BarSeries:
    """One full 240-bar day (09:31-11:30 and 13:01-15:00 under the default
    calendar), with constant closes unless a 240-vector is supplied."""
    calendar = calendar or SessionCalendar()
    stamps = session_minutes(calendar, day)
    if closes is None:
        closes = [5000.0] * len(stamps)
    return BarSeries.build(stamps, closes, calendar)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bnsjump.synthetic",
                                     description="write a synthetic minute-bar CSV fixture")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--days", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--start", default="2021-01-04", help="first day, ISO date")
    args = parser.parse_args(argv)
    bars = synthetic_bars(days=args.days, seed=args.seed, start=date.fromisoformat(args.start))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_bars_csv(fh, bars)
    print(f"wrote {len(bars)} bars to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
