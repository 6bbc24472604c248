"""Minute-bar ingestion, preprocessing, resampling and realized-volatility measures.

The pipeline mirrors standard high-frequency practice for a two-session
equity market (default sessions 09:30-11:30 and 13:00-15:00): bars outside
the sessions are rejected at load, the first minutes after the daily open
are trimmed to absorb overnight information, zero/non-positive prices and
extreme outliers are dropped, and returns are computed strictly within
sessions so no percent change spans the lunch break or an overnight gap.

Realized measures per window:

    RV   = sum of squared returns
    BV   = (pi / 2) * sum of |r_i| * |r_{i-1}| over adjacent in-session pairs
    jump = max(RV - BV, 0)
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, time
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import InvalidParameterError, OrderingError, ParseError

log = logging.getLogger(__name__)

BV_SCALE = math.pi / 2.0  # 1 / mu_1^2 for the absolute first moment of a standard normal


def _parse_session(text: str) -> tuple[time, time]:
    try:
        lo, hi = text.strip().split("-")
        return time.fromisoformat(lo.strip()), time.fromisoformat(hi.strip())
    except ValueError as exc:
        raise InvalidParameterError(f"bad session spec {text!r}: {exc}") from None


@dataclass(frozen=True)
class SessionCalendar:
    """Ordered, non-overlapping intraday trading sessions (open, close)."""

    sessions: tuple[tuple[time, time], ...] = (
        (time(9, 30), time(11, 30)),
        (time(13, 0), time(15, 0)),
    )
    timezone: str = "Asia/Shanghai"

    def __post_init__(self):
        prev_close = None
        for open_t, close_t in self.sessions:
            if close_t <= open_t:
                raise InvalidParameterError(f"session close {close_t} not after open {open_t}")
            if prev_close is not None and open_t < prev_close:
                raise InvalidParameterError("sessions overlap or are out of order")
            prev_close = close_t

    @classmethod
    def from_spec(cls, spec: str, timezone: str = "Asia/Shanghai") -> "SessionCalendar":
        """Parse a calendar from a spec like ``09:30-11:30,13:00-15:00``."""
        sessions = tuple(_parse_session(part) for part in spec.split(",") if part.strip())
        if not sessions:
            raise InvalidParameterError("calendar spec contains no sessions")
        return cls(sessions=sessions, timezone=timezone)

    def to_spec(self) -> str:
        return ",".join(f"{o.strftime('%H:%M')}-{c.strftime('%H:%M')}" for o, c in self.sessions)

    def session_index(self, ts: datetime) -> int | None:
        """Index of the session containing ``ts`` (inclusive ends), else None."""
        t = ts.time()
        for i, (open_t, close_t) in enumerate(self.sessions):
            if open_t <= t <= close_t:
                return i
        return None

    def session_minutes(self, idx: int) -> int:
        open_t, close_t = self.sessions[idx]
        return (close_t.hour - open_t.hour) * 60 + (close_t.minute - open_t.minute)

    def minute_position(self, ts: datetime, session_idx: int) -> int:
        """Cumulative trading-minute position of ``ts`` within its day.

        Minutes of earlier sessions are counted in full, so positions run
        1..240 across the default two-session day and buckets built from
        them never split on the lunch break when the interval divides the
        session length.
        """
        open_t, _ = self.sessions[session_idx]
        offset = sum(self.session_minutes(j) for j in range(session_idx))
        within = (ts.hour - open_t.hour) * 60 + (ts.minute - open_t.minute)
        return offset + within

    def day_open(self) -> time:
        return self.sessions[0][0]


@dataclass(frozen=True)
class BarSeries:
    """Timestamped close prices tagged with day and session."""

    timestamps: tuple[datetime, ...]
    closes: np.ndarray
    session: np.ndarray  # session index per row
    calendar: SessionCalendar

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def days(self) -> list[date]:
        return [ts.date() for ts in self.timestamps]

    @classmethod
    def build(cls, timestamps: Iterable[datetime], closes: Iterable[float],
              calendar: SessionCalendar) -> "BarSeries":
        stamps = tuple(timestamps)
        values = np.asarray(list(closes), dtype=float)
        if len(stamps) != len(values):
            raise InvalidParameterError("timestamps and closes differ in length")
        for a, b in zip(stamps, stamps[1:]):
            if b <= a:
                raise OrderingError(f"timestamps not strictly increasing at {b}")
        session = np.empty(len(stamps), dtype=int)
        for i, ts in enumerate(stamps):
            idx = calendar.session_index(ts)
            if idx is None:
                raise InvalidParameterError(f"bar at {ts} falls outside every session")
            session[i] = idx
        return cls(timestamps=stamps, closes=values, session=session, calendar=calendar)

    def select(self, mask: np.ndarray) -> "BarSeries":
        keep = [ts for ts, m in zip(self.timestamps, mask) if m]
        return BarSeries(timestamps=tuple(keep), closes=self.closes[mask],
                         session=self.session[mask], calendar=self.calendar)


@dataclass(frozen=True)
class ReturnSeries:
    """Consecutive within-session percent changes, 100 * (P_k - P_{k-1}) / P_{k-1}."""

    timestamps: tuple[datetime, ...]
    values: np.ndarray
    session: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def days(self) -> list[date]:
        return [ts.date() for ts in self.timestamps]

    def session_keys(self) -> np.ndarray:
        """Integer id per row, constant exactly within one (day, session) block."""
        keys = np.zeros(len(self), dtype=int)
        current = 0
        for i in range(1, len(self)):
            if (self.timestamps[i].date() != self.timestamps[i - 1].date()
                    or self.session[i] != self.session[i - 1]):
                current += 1
            keys[i] = current
        return keys


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.BytesIO) or (hasattr(source, "read") and "b" in getattr(source, "mode", "")):
        return io.TextIOWrapper(source, encoding="utf-8")
    return source


def load_bars(source, calendar: SessionCalendar | None = None) -> tuple[BarSeries, int]:
    """Parse a ``timestamp,close`` CSV into a BarSeries.

    Rows outside the calendar sessions are rejected (their count is
    returned); malformed rows raise ParseError with the line number and
    non-monotone timestamps raise OrderingError.
    """
    calendar = calendar or SessionCalendar()
    fh = _open_text(source)
    close_after = isinstance(source, (str, Path))
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected header 'timestamp,close'", 1) from None
        if [h.strip().lower() for h in header] != ["timestamp", "close"]:
            raise ParseError(f"expected header 'timestamp,close', got {','.join(header)!r}", 1)
        stamps: list[datetime] = []
        closes: list[float] = []
        sessions: list[int] = []
        rejected = 0
        prev: datetime | None = None
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", line_no)
            try:
                ts = datetime.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"bad timestamp {row[0]!r}", line_no) from None
            try:
                close = float(row[1])
            except ValueError:
                raise ParseError(f"bad close {row[1]!r}", line_no) from None
            if not math.isfinite(close):
                raise ParseError(f"non-finite close {row[1]!r}", line_no)
            if prev is not None and ts <= prev:
                raise OrderingError(f"line {line_no}: timestamp {ts} not after {prev}")
            prev = ts
            idx = calendar.session_index(ts)
            if idx is None:
                rejected += 1
                continue
            stamps.append(ts)
            closes.append(close)
            sessions.append(idx)
    finally:
        if close_after:
            fh.close()
    series = BarSeries(timestamps=tuple(stamps), closes=np.array(closes, dtype=float),
                       session=np.array(sessions, dtype=int), calendar=calendar)
    return series, rejected


OutlierPolicy = Callable[[BarSeries], np.ndarray]


def sigma_outlier_policy(threshold: float = 10.0) -> OutlierPolicy:
    """Flag bars whose within-session 1-bar percent change exceeds
    ``threshold`` standard deviations of that day's changes."""
    def policy(series: BarSeries) -> np.ndarray:
        mask = np.zeros(len(series), dtype=bool)
        changes = np.full(len(series), np.nan)
        days = series.days
        for i in range(1, len(series)):
            same_block = (days[i] == days[i - 1] and series.session[i] == series.session[i - 1])
            if same_block and series.closes[i - 1] > 0:
                changes[i] = 100.0 * (series.closes[i] - series.closes[i - 1]) / series.closes[i - 1]
        for day in sorted(set(days)):
            rows = np.array([d == day for d in days])
            day_changes = changes[rows]
            finite = day_changes[np.isfinite(day_changes)]
            if len(finite) < 2:
                continue
            sd = float(np.std(finite))
            if sd == 0.0:
                continue
            flag = rows & np.isfinite(changes) & (np.abs(changes) > threshold * sd)
            mask |= flag
        return mask

    policy.description = f"drop bars with |1-bar pct change| > {threshold} x same-day std"
    return policy


def preprocess(series: BarSeries, trim_minutes: int = 10,
               outlier_policy: OutlierPolicy | None = sigma_outlier_policy(),
               trim_reopen: bool = False) -> tuple[BarSeries, float]:
    """Apply opening-window trimming and bad-data removal.

    Per trading day, bars within ``trim_minutes`` of the daily open are
    dropped (the afternoon reopen is only trimmed with ``trim_reopen``);
    zero/non-positive closes are dropped; bars flagged by the outlier
    policy are dropped.  Returns the cleaned series and the fraction of
    rows removed.
    """
    if trim_minutes < 0:
        raise InvalidParameterError(f"trim_minutes must be >= 0, got {trim_minutes}")
    n = len(series)
    if n == 0:
        return series, 0.0
    drop = np.zeros(n, dtype=bool)
    cal = series.calendar
    open_minutes = [(s[0].hour * 60 + s[0].minute) for s in cal.sessions]
    for i, ts in enumerate(series.timestamps):
        sess = int(series.session[i])
        minute = ts.hour * 60 + ts.minute
        if sess == 0 and minute - open_minutes[0] <= trim_minutes:
            drop[i] = True
        elif trim_reopen and sess > 0 and minute - open_minutes[sess] <= trim_minutes:
            drop[i] = True
    drop |= series.closes <= 0.0
    if outlier_policy is not None:
        flagged = outlier_policy(series) & ~drop
        if flagged.any():
            log.info("outlier policy (%s) removed %d bars",
                     getattr(outlier_policy, "description", "custom"), int(flagged.sum()))
        drop |= flagged
    cleaned = series.select(~drop)
    return cleaned, float(drop.sum()) / n


def resample(series: BarSeries, interval_minutes: int) -> BarSeries:
    """Last close per ``interval_minutes`` bucket of cumulative trading minutes.

    Buckets are built per day from the calendar's minute positions, so they
    align with sessions whenever the interval divides the session length; a
    full-day interval yields the daily close.
    """
    if interval_minutes <= 0:
        raise InvalidParameterError(f"interval must be positive, got {interval_minutes}")
    if interval_minutes == 1 or len(series) == 0:
        return series
    cal = series.calendar
    keep: list[int] = []
    last_key: tuple[date, int] | None = None
    for i, ts in enumerate(series.timestamps):
        pos = cal.minute_position(ts, int(series.session[i]))
        bucket = -(-pos // interval_minutes)  # ceil division
        key = (ts.date(), bucket)
        if key == last_key:
            keep[-1] = i
        else:
            keep.append(i)
            last_key = key
    mask = np.zeros(len(series), dtype=bool)
    mask[keep] = True
    return series.select(mask)


def pct_change(series: BarSeries) -> ReturnSeries:
    """Consecutive percent changes within each (day, session) block.

    The first bar of every session emits no return, so no change spans the
    lunch break or an overnight gap.
    """
    stamps: list[datetime] = []
    values: list[float] = []
    sessions: list[int] = []
    days = series.days
    for i in range(1, len(series)):
        if days[i] != days[i - 1] or series.session[i] != series.session[i - 1]:
            continue
        prev_close = series.closes[i - 1]
        if prev_close <= 0:
            continue
        stamps.append(series.timestamps[i])
        values.append(100.0 * (series.closes[i] - prev_close) / prev_close)
        sessions.append(int(series.session[i]))
    return ReturnSeries(timestamps=tuple(stamps), values=np.array(values, dtype=float),
                        session=np.array(sessions, dtype=int))


@dataclass(frozen=True)
class StatsReport:
    """Descriptive statistics of one group of closes.

    Skewness is the adjusted Fisher-Pearson estimator and kurtosis is
    excess (normal = 0); on a constant group skewness is reported as 0 and
    kurtosis as NaN.
    """

    count: int
    mean: float
    median: float
    minimum: float
    maximum: float
    skewness: float
    excess_kurtosis: float


def _skew_kurt(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    m = x.mean()
    m2 = float(np.mean((x - m) ** 2))
    if m2 == 0.0:
        return 0.0, float("nan")
    g1 = float(np.mean((x - m) ** 3)) / m2**1.5
    g2 = float(np.mean((x - m) ** 4)) / m2**2 - 3.0
    skew = g1 * math.sqrt(n * (n - 1)) / (n - 2) if n > 2 else float("nan")
    kurt = ((n + 1) * g2 + 6.0) * (n - 1) / ((n - 2) * (n - 3)) if n > 3 else float("nan")
    return skew, kurt


def descriptive_stats(series: BarSeries, group_by: str = "overall") -> dict[str, StatsReport]:
    """Count/mean/median/min/max/skewness/excess-kurtosis of the closes,
    either for the whole series or per calendar month."""
    if group_by not in ("overall", "month"):
        raise InvalidParameterError(f"group_by must be 'overall' or 'month', got {group_by!r}")
    groups: dict[str, list[float]] = {}
    for ts, close in zip(series.timestamps, series.closes):
        key = "overall" if group_by == "overall" else f"{ts.year:04d}-{ts.month:02d}"
        groups.setdefault(key, []).append(float(close))
    reports: dict[str, StatsReport] = {}
    for key in sorted(groups):
        x = np.array(groups[key])
        if len(x) == 0:
            log.info("group %s is empty, omitted from stats", key)
            continue
        skew, kurt = _skew_kurt(x)
        reports[key] = StatsReport(
            count=len(x), mean=float(x.mean()), median=float(np.median(x)),
            minimum=float(x.min()), maximum=float(x.max()),
            skewness=skew, excess_kurtosis=kurt,
        )
    return reports


@dataclass(frozen=True)
class RVSeries:
    """Per-window realized volatility decomposition.

    bipower and jump are NaN when a window has no adjacent in-session
    return pair to estimate from.
    """

    labels: tuple[str, ...]
    window_end: tuple[datetime, ...]
    realized_volatility: np.ndarray
    bipower_variation: np.ndarray
    jump_component: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


def realized_measures(returns: ReturnSeries, window: str = "day") -> RVSeries:
    """RV, bipower variation and the jump component per day or month.

    Adjacent |r_i| * |r_{i-1}| products only pair returns from the same
    session, so the estimator never multiplies across the lunch break.
    """
    if window not in ("day", "month"):
        raise InvalidParameterError(f"window must be 'day' or 'month', got {window!r}")
    order: list[str] = []
    rows: dict[str, list[int]] = {}
    for i, ts in enumerate(returns.timestamps):
        key = ts.date().isoformat() if window == "day" else f"{ts.year:04d}-{ts.month:02d}"
        if key not in rows:
            rows[key] = []
            order.append(key)
        rows[key].append(i)
    labels: list[str] = []
    ends: list[datetime] = []
    rv_out: list[float] = []
    bv_out: list[float] = []
    jump_out: list[float] = []
    keys = returns.session_keys()
    for key in order:
        idx = rows[key]
        r = returns.values[idx]
        rv = float(np.sum(r**2))
        pair_terms = []
        for a, b in zip(idx, idx[1:]):
            if b == a + 1 and keys[a] == keys[b]:
                pair_terms.append(abs(returns.values[a]) * abs(returns.values[b]))
        if len(r) < 2 or not pair_terms:
            bv = float("nan")
            jump = float("nan")
        else:
            bv = BV_SCALE * float(np.sum(pair_terms))
            jump = max(rv - bv, 0.0)
        labels.append(key)
        ends.append(returns.timestamps[idx[-1]])
        rv_out.append(rv)
        bv_out.append(bv)
        jump_out.append(jump)
    return RVSeries(labels=tuple(labels), window_end=tuple(ends),
                    realized_volatility=np.array(rv_out), bipower_variation=np.array(bv_out),
                    jump_component=np.array(jump_out))


STATS_CSV_HEADER = ["group", "count", "mean", "median", "minimum", "maximum",
                    "skewness", "excess_kurtosis"]
RV_CSV_HEADER = ["window", "window_end", "realized_volatility", "bipower_variation",
                 "jump_component"]


def _fmt(x: float) -> str:
    return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def write_stats_csv(fileobj, reports: dict[str, StatsReport]) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(STATS_CSV_HEADER)
    for key in sorted(reports):
        r = reports[key]
        writer.writerow([key, r.count, _fmt(r.mean), _fmt(r.median), _fmt(r.minimum),
                         _fmt(r.maximum), _fmt(r.skewness), _fmt(r.excess_kurtosis)])


def stats_to_json(reports: dict[str, StatsReport]) -> str:
    payload = {
        key: {
            "count": r.count, "mean": r.mean, "median": r.median,
            "minimum": r.minimum, "maximum": r.maximum,
            "skewness": r.skewness,
            "excess_kurtosis": None if math.isnan(r.excess_kurtosis) else r.excess_kurtosis,
        }
        for key, r in reports.items()
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_rv_csv(fileobj, rv: RVSeries) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(RV_CSV_HEADER)
    for i in range(len(rv)):
        writer.writerow([
            rv.labels[i], rv.window_end[i].isoformat(sep=" "),
            _fmt(rv.realized_volatility[i]), _fmt(rv.bipower_variation[i]),
            _fmt(rv.jump_component[i]),
        ])


def rv_to_json(rv: RVSeries) -> str:
    def opt(x: float):
        return None if math.isnan(x) else float(x)

    payload = {
        rv.labels[i]: {
            "window_end": rv.window_end[i].isoformat(sep=" "),
            "realized_volatility": float(rv.realized_volatility[i]),
            "bipower_variation": opt(rv.bipower_variation[i]),
            "jump_component": opt(rv.jump_component[i]),
        }
        for i in range(len(rv))
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_bars_csv(fileobj, series: BarSeries) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["timestamp", "close"])
    for ts, close in zip(series.timestamps, series.closes):
        writer.writerow([ts.isoformat(sep=" "), repr(float(close))])
