"""Data ingestion: case-count and price CSVs, the week-scaled time axis,
daily returns, and the crisis indicator design matrix.

Accepted date formats are ISO-8601 (2020-03-25) and the wide-CSV header
form M/D/YY (3/25/20); nothing else parses. Case CSVs follow the
wide layout used by public COVID trackers: metadata columns first, then
one column per date, one row per region/province. Price CSVs need a
header with ``date`` and ``close`` columns; extra columns are ignored.
"""

from __future__ import annotations

import csv
import datetime as dt
import difflib
import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataCleaningWarning, InputError, ParseError, RegionNotFoundError

Date = dt.date

#: Crisis date windows used throughout, both endpoints inclusive.
DEFAULT_CRISIS_WINDOWS: tuple["CrisisWindow", ...]


@dataclass(frozen=True)
class CaseSeries:
    """Dated cumulative confirmed-case counts for one region."""

    region: str
    dates: tuple[Date, ...]
    cumulative: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        values = np.asarray(self.cumulative, dtype=float)
        if len(self.dates) != values.size:
            raise InputError(f"{len(self.dates)} dates vs {values.size} counts")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InputError("dates must be strictly increasing")
        if (values < 0).any():
            raise InputError("cumulative counts must be non-negative")
        if (np.diff(values) < 0).any():
            raise InputError("cumulative counts must be non-decreasing (clean on load)")
        values.flags.writeable = False
        object.__setattr__(self, "cumulative", values)

    @property
    def date0(self) -> Date:
        """First observation date, the origin of the week axis."""
        return self.dates[0]


@dataclass(frozen=True)
class PriceSeries:
    """Dated closing prices for one ticker."""

    ticker: str
    dates: tuple[Date, ...]
    close: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        values = np.asarray(self.close, dtype=float)
        if len(self.dates) != values.size:
            raise InputError(f"{len(self.dates)} dates vs {values.size} prices")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InputError("dates must be strictly increasing")
        if (values <= 0).any():
            raise InputError("prices must be positive")
        values.flags.writeable = False
        object.__setattr__(self, "close", values)


@dataclass(frozen=True)
class ReturnSeries:
    """Daily returns derived from a price series, dated at the later day."""

    ticker: str
    dates: tuple[Date, ...]
    returns: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        values = np.asarray(self.returns, dtype=float)
        if len(self.dates) != values.size:
            raise InputError(f"{len(self.dates)} dates vs {values.size} returns")
        values.flags.writeable = False
        object.__setattr__(self, "returns", values)


@dataclass(frozen=True)
class CrisisWindow:
    """Named date window, both endpoints inclusive."""

    name: str
    start: Date
    end: Date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ConfigError(f"window {self.name!r}: start {self.start} after end {self.end}")

    def contains(self, date: Date) -> bool:
        return self.start <= date <= self.end


DEFAULT_CRISIS_WINDOWS = (
    CrisisWindow("crisis_2008", dt.date(2008, 1, 1), dt.date(2009, 1, 31)),
    CrisisWindow("down_turn_2018", dt.date(2018, 10, 1), dt.date(2019, 1, 3)),
    CrisisWindow("coronavirus", dt.date(2020, 2, 18), dt.date(2020, 3, 25)),
)


@dataclass(frozen=True)
class CrisisDesign:
    """Date-aligned {0,1} indicator matrix: intercept column, then one
    column per window."""

    dates: tuple[Date, ...]
    window_names: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "window_names", tuple(self.window_names))
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (len(self.dates), 1 + len(self.window_names)):
            raise InputError(f"design shape {mat.shape} does not match dates/windows")
        if not np.array_equal(mat[:, 0], np.ones(len(self.dates))):
            raise InputError("first design column must be the all-ones intercept")
        body = mat[:, 1:]
        if not np.isin(body, (0.0, 1.0)).all():
            raise InputError("indicator entries must be 0 or 1")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def column_counts(self) -> dict[str, int]:
        """Trading dates covered by each window column."""
        return {
            name: int(self.matrix[:, 1 + i].sum())
            for i, name in enumerate(self.window_names)
        }


def parse_date(text: str) -> Date:
    """Parse ISO-8601 or M/D/YY; anything else raises ParseError."""
    text = text.strip()
    for fmt in ("%Y-%m-%d", "%m/%d/%y"):
        try:
            return dt.datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ParseError(f"unparseable date {text!r} (expected YYYY-MM-DD or M/D/YY)")


def _open_text(source: str | Path | IO[str] | IO[bytes] | bytes) -> io.StringIO:
    if isinstance(source, (str, Path)):
        return io.StringIO(Path(source).read_text(encoding="utf-8"))
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


_REGION_COLUMNS = ("country/region", "country_region", "country", "region")


def load_case_csv(source, region: str) -> CaseSeries:
    """Load a wide-format case CSV and aggregate all rows of ``region``.

    Rows matching the region (matched case-insensitively against the
    country/region metadata column when present, any metadata column
    otherwise) are summed column-wise; leading all-zero dates are
    trimmed; decreasing cumulative values are clamped to the running
    maximum with a warning.
    """
    reader = csv.reader(_open_text(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("case CSV is empty") from None

    first_date_col = None
    for i, cell in enumerate(header):
        try:
            parse_date(cell)
        except ParseError:
            continue
        first_date_col = i
        break
    if first_date_col is None:
        raise ParseError("case CSV has no date columns in its header")
    dates = []
    for i in range(first_date_col, len(header)):
        try:
            dates.append(parse_date(header[i]))
        except ParseError:
            raise ParseError(f"malformed date header in column {i}: {header[i]!r}") from None

    region_col = None
    for i, cell in enumerate(header[:first_date_col]):
        if cell.strip().lower() in _REGION_COLUMNS:
            region_col = i
            break

    wanted = region.strip().lower()
    totals = np.zeros(len(dates))
    candidates: set[str] = set()
    found = False
    for line_no, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        meta = row[:first_date_col]
        if region_col is not None:
            names = [meta[region_col]] if region_col < len(meta) else []
        else:
            names = meta
        candidates.update(n.strip() for n in names if n.strip())
        if not any(n.strip().lower() == wanted for n in names):
            continue
        found = True
        cells = row[first_date_col:]
        if len(cells) != len(dates):
            raise ParseError(f"line {line_no}: expected {len(dates)} value columns, got {len(cells)}")
        try:
            totals += np.array([float(c) if c.strip() else 0.0 for c in cells])
        except ValueError as exc:
            raise ParseError(f"line {line_no}: {exc}") from None
    if not found:
        near = difflib.get_close_matches(region, sorted(candidates), n=3, cutoff=0.5)
        raise RegionNotFoundError(region, near)

    nonzero = np.nonzero(totals > 0)[0]
    if nonzero.size == 0:
        raise InputError(f"region {region!r} has no nonzero case counts")
    start = nonzero[0]
    dates = dates[start:]
    totals = totals[start:]

    cleaned = np.maximum.accumulate(totals)
    for i in np.nonzero(cleaned != totals)[0]:
        warnings.warn(
            f"{region}: cumulative count drops at {dates[i]} "
            f"({totals[i]:g} < running max {cleaned[i]:g}); clamped",
            DataCleaningWarning,
            stacklevel=2,
        )
    return CaseSeries(region=region, dates=tuple(dates), cumulative=cleaned)


def to_week_axis(dates: Iterable[Date], date0: Date) -> np.ndarray:
    """Map calendar dates to weeks since ``date0``: t_i = days / 7."""
    out = []
    for d in dates:
        delta = (d - date0).days
        if delta < 0:
            raise InputError(f"date {d} precedes the axis origin {date0}")
        out.append(delta / 7.0)
    return np.array(out)


def load_price_csv(source, ticker: str = "") -> PriceSeries:
    """Load a (date, close) CSV; rows are sorted, duplicate dates keep the
    last value, and non-positive prices are rejected row-by-row."""
    reader = csv.reader(_open_text(source))
    try:
        header = [c.strip().lower() for c in next(reader)]
    except StopIteration:
        raise ParseError("price CSV is empty") from None
    try:
        date_col = header.index("date")
        close_col = header.index("close")
    except ValueError:
        raise ParseError(f"price CSV needs 'date' and 'close' columns, got {header}") from None
    if not ticker and "ticker" in header:
        ticker_col = header.index("ticker")
    else:
        ticker_col = None

    by_date: dict[Date, float] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) <= max(date_col, close_col):
            raise ParseError(f"line {line_no}: too few columns ({len(row)})")
        try:
            date = parse_date(row[date_col])
        except ParseError as exc:
            raise ParseError(f"line {line_no}: {exc}") from None
        try:
            price = float(row[close_col])
        except ValueError:
            raise ParseError(f"line {line_no}: unparseable close {row[close_col]!r}") from None
        if price <= 0:
            warnings.warn(f"line {line_no}: non-positive price {price:g} rejected",
                          DataCleaningWarning, stacklevel=2)
            continue
        if date in by_date:
            warnings.warn(f"line {line_no}: duplicate date {date}, keeping the later row",
                          DataCleaningWarning, stacklevel=2)
        by_date[date] = price
        if ticker_col is not None and not ticker and row[ticker_col].strip():
            ticker = row[ticker_col].strip()
    if not by_date:
        raise ParseError("price CSV has no usable rows")
    dates = tuple(sorted(by_date))
    return PriceSeries(ticker=ticker, dates=dates, close=np.array([by_date[d] for d in dates]))


def daily_returns(prices: PriceSeries, method: str = "simple") -> ReturnSeries:
    """Close-to-close returns between consecutive available prices.

    ``simple``: r_i = (p_i - p_{i-1}) / p_{i-1}; ``log``: ln(p_i / p_{i-1}).
    Calendar gaps are not interpolated.
    """
    if len(prices.dates) < 2:
        raise InputError("need at least 2 prices to compute returns")
    if method == "simple":
        rets = np.diff(prices.close) / prices.close[:-1]
    elif method == "log":
        rets = np.diff(np.log(prices.close))
    else:
        raise InputError(f"unknown return method {method!r} (use 'simple' or 'log')")
    return ReturnSeries(ticker=prices.ticker, dates=prices.dates[1:], returns=rets)


def build_crisis_design(dates: Sequence[Date], windows: Sequence[CrisisWindow]) -> CrisisDesign:
    """Intercept column plus one {0,1} indicator per window (endpoints
    inclusive). Windows must be pairwise non-overlapping."""
    windows = list(windows)
    for i, a in enumerate(windows):
        for b in windows[i + 1:]:
            if a.start <= b.end and b.start <= a.end:
                raise ConfigError(f"crisis windows {a.name!r} and {b.name!r} overlap")
    dates = tuple(dates)
    matrix = np.ones((len(dates), 1 + len(windows)))
    for j, w in enumerate(windows):
        matrix[:, 1 + j] = [1.0 if w.contains(d) else 0.0 for d in dates]
    return CrisisDesign(dates=dates, window_names=tuple(w.name for w in windows), matrix=matrix)


def load_crisis_windows_csv(source) -> tuple[CrisisWindow, ...]:
    """Read windows from a (name, start, end) CSV."""
    reader = csv.DictReader(_open_text(source))
    needed = {"name", "start", "end"}
    if reader.fieldnames is None or not needed.issubset({f.strip().lower() for f in reader.fieldnames}):
        raise ParseError(f"windows CSV needs columns name,start,end; got {reader.fieldnames}")
    out = []
    for row in reader:
        row = {k.strip().lower(): v for k, v in row.items() if k}
        out.append(CrisisWindow(row["name"].strip(), parse_date(row["start"]), parse_date(row["end"])))
    if not out:
        raise ParseError("windows CSV has no rows")
    return tuple(out)


# canonical long-format serialization (round-trips exactly)

def case_series_to_csv(series: CaseSeries) -> str:
    lines = ["region,date,cumulative_cases"]
    for d, v in zip(series.dates, series.cumulative):
        lines.append(f"{series.region},{d.isoformat()},{repr(float(v))}")
    return "\n".join(lines) + "\n"


def case_series_from_csv(source) -> CaseSeries:
    reader = csv.DictReader(_open_text(source))
    rows = list(reader)
    if not rows:
        raise ParseError("long-format case CSV has no rows")
    region = rows[0]["region"]
    dates = tuple(parse_date(r["date"]) for r in rows)
    values = np.array([float(r["cumulative_cases"]) for r in rows])
    return CaseSeries(region=region, dates=dates, cumulative=values)


def price_series_to_csv(series: PriceSeries) -> str:
    lines = ["ticker,date,close"]
    for d, v in zip(series.dates, series.close):
        lines.append(f"{series.ticker},{d.isoformat()},{repr(float(v))}")
    return "\n".join(lines) + "\n"


def price_series_from_csv(source) -> PriceSeries:
    reader = csv.DictReader(_open_text(source))
    rows = list(reader)
    if not rows:
        raise ParseError("long-format price CSV has no rows")
    ticker = rows[0]["ticker"]
    dates = tuple(parse_date(r["date"]) for r in rows)
    values = np.array([float(r["close"]) for r in rows])
    return PriceSeries(ticker=ticker, dates=dates, close=values)
