"""Epidemic time-series ingestion, derived features, and fuzzy scaling.

The pipeline is: fetch raw bytes (remote URL or local file), parse them into
date-sorted, gapless daily records, derive the active-case and new-case
series, min-max "fuzzify" whatever columns a model consumes, and split
chronologically.  Scales are always computed on the training partition and
applied unchanged to the test partition, so test values may legitimately
fall outside [0, 1].

Input CSV needs a header with ``date, confirmed, deaths, recovered``
(case-insensitive, any order); the canonical output format appends the
derived ``active, new_cases, day_index`` columns.
"""

import csv
import io
import math
import urllib.parse
import urllib.request
import warnings
from dataclasses import dataclass, replace
from datetime import date as Date
from importlib import resources
from pathlib import Path

import numpy as np
import requests
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import (
    DataConsistencyWarning,
    DegenerateScaleError,
    DimensionError,
    FetchError,
    GapError,
    ParameterError,
    RowError,
    SchemaError,
    SplitError,
)

REQUIRED_COLUMNS = ("date", "confirmed", "deaths", "recovered")
DERIVED_COLUMNS = ("active", "new_cases", "day_index")

#: Prediction targets a model can be trained on.
TARGETS = ("deaths", "confirmed")

#: Names of the bundled offline snapshots.
BUNDLED_SOURCES = ("india", "usa")


@dataclass(frozen=True)
class TimeSeriesRecord:
    """One day of a country's epidemic counters."""

    date: Date
    confirmed: int
    deaths: int
    recovered: int
    day_index: int
    active: int | None = None
    new_cases: int | None = None

    @property
    def inconsistent(self) -> bool:
        """True when deaths + recovered exceed confirmed (kept, not dropped)."""
        return self.confirmed < self.deaths + self.recovered


@dataclass(frozen=True)
class FuzzyScale:
    """Linear membership bounds: min maps to 0, max maps to 1."""

    min: float
    max: float

    def __post_init__(self):
        if not (self.max > self.min):
            raise DegenerateScaleError(
                f"scale needs max > min, got min={self.min}, max={self.max}"
            )


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

def _as_text_lines(source):
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _parse_int(field: str, column: str, line_num: int) -> int:
    try:
        return int(field.strip())
    except ValueError:
        raise RowError(f"line {line_num}: column {column!r} has non-integer value {field!r}") from None


def parse_timeseries(source) -> list[TimeSeriesRecord]:
    """Parse a raw or canonical CSV into date-sorted daily records.

    Parameters
    ----------
    source : bytes, str, or file-like
        CSV content.  The header must contain date/confirmed/deaths/recovered
        (case-insensitive); the derived columns are read back when present so
        canonical output re-parses to the same records.

    Returns
    -------
    list of TimeSeriesRecord
        Sorted by date, ``day_index`` counting from 0, verified gapless.
    """
    reader = csv.reader(_as_text_lines(source))
    try:
        raw_header = next(reader)
    except StopIteration:
        raise SchemaError("input is empty; expected a CSV header row") from None

    header = [cell.strip().lower() for cell in raw_header]
    positions = {}
    for idx, name in enumerate(header):
        if name and name not in positions:
            positions[name] = idx
    for column in REQUIRED_COLUMNS:
        if column not in positions:
            raise SchemaError(f"missing required column {column!r}")

    rows = []
    for line_num, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue  # ignore blank lines
        if len(cells) < len(positions):
            raise RowError(f"line {line_num}: expected {len(positions)} fields, got {len(cells)}")

        def field(column):
            return cells[positions[column]]

        try:
            day = Date.fromisoformat(field("date").strip())
        except ValueError:
            raise RowError(
                f"line {line_num}: unparseable date {field('date')!r} (expected ISO-8601)"
            ) from None
        record = {
            "date": day,
            "confirmed": _parse_int(field("confirmed"), "confirmed", line_num),
            "deaths": _parse_int(field("deaths"), "deaths", line_num),
            "recovered": _parse_int(field("recovered"), "recovered", line_num),
        }
        for column in ("active", "new_cases"):
            if column in positions and field(column).strip():
                record[column] = _parse_int(field(column), column, line_num)
            else:
                record[column] = None
        rows.append(record)

    rows.sort(key=lambda row: row["date"])
    records = []
    for idx, row in enumerate(rows):
        if idx:
            step = (row["date"] - rows[idx - 1]["date"]).days
            if step == 0:
                raise RowError(f"duplicate date {row['date'].isoformat()}")
            if step != 1:
                raise GapError(
                    f"missing day(s) between {rows[idx - 1]['date'].isoformat()} "
                    f"and {row['date'].isoformat()}"
                )
        records.append(TimeSeriesRecord(day_index=idx, **row))
    return records


def to_canonical_csv(records) -> str:
    """Serialize records to the canonical CSV format (derived columns included)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS + DERIVED_COLUMNS)
    for record in records:
        writer.writerow(
            [
                record.date.isoformat(),
                record.confirmed,
                record.deaths,
                record.recovered,
                "" if record.active is None else record.active,
                "" if record.new_cases is None else record.new_cases,
                record.day_index,
            ]
        )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Derived features
# ---------------------------------------------------------------------------

def derive_features(records) -> list[TimeSeriesRecord]:
    """Fill in active cases and day-over-day new cases.

    active = confirmed - (deaths + recovered); new_cases is the first
    difference of active, with the first day's value equal to the first
    active count.  Negative new-case values (data corrections at the source)
    are preserved.  Idempotent; input is not modified.
    """
    derived = []
    previous_active = 0
    inconsistent = 0
    for idx, record in enumerate(records):
        active = record.confirmed - (record.deaths + record.recovered)
        new_cases = active if idx == 0 else active - previous_active
        if record.inconsistent:
            inconsistent += 1
        derived.append(replace(record, active=active, new_cases=new_cases))
        previous_active = active
    if inconsistent:
        warnings.warn(
            f"{inconsistent} record(s) report more deaths+recovered than confirmed cases",
            DataConsistencyWarning,
            stacklevel=2,
        )
    return derived


def feature_matrix(records, target: str):
    """Build the (X, y) arrays a model trains on.

    Features are the day index plus the two raw counters complementary to
    the target: predicting deaths uses (day_index, confirmed, recovered);
    predicting confirmed uses (day_index, deaths, recovered).

    Returns
    -------
    X : ndarray of shape (n_days, 3)
    y : ndarray of shape (n_days,)
    """
    if target not in TARGETS:
        raise ParameterError(f"target must be one of {TARGETS}, got {target!r}")
    if not records:
        raise DimensionError("at least one record is required")
    complements = [c for c in ("confirmed", "deaths", "recovered") if c != target]
    X = np.array(
        [[r.day_index, getattr(r, complements[0]), getattr(r, complements[1])] for r in records],
        dtype=float,
    )
    y = np.array([getattr(r, target) for r in records], dtype=float)
    return X, y


# ---------------------------------------------------------------------------
# Fuzzy scaling
# ---------------------------------------------------------------------------

def fuzzify(values):
    """Min-max squash a column into [0, 1].

    Returns
    -------
    (scaled, scale) : (ndarray, FuzzyScale)
        ``scaled`` maps the column minimum to exactly 0 and the maximum to
        exactly 1.

    Raises
    ------
    DegenerateScaleError
        If the column is constant (fewer than 2 distinct values).
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DimensionError("fuzzify expects a nonempty 1-d sequence")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DegenerateScaleError(f"column is constant at {lo}; cannot scale")
    scale = FuzzyScale(min=lo, max=hi)
    return apply_scale(values, scale), scale


def apply_scale(values, scale: FuzzyScale):
    """Apply an existing scale: (v - min) / (max - min).

    This is how test-partition values are scaled with train-partition
    bounds; results outside [0, 1] are allowed and passed through.
    """
    values = np.asarray(values, dtype=float)
    return (values - scale.min) / (scale.max - scale.min)


def defuzzify(value, scale: FuzzyScale):
    """Invert :func:`apply_scale`: v * (max - min) + min."""
    return np.asarray(value, dtype=float) * (scale.max - scale.min) + scale.min


class FuzzyScaler(TransformerMixin, BaseEstimator):
    """Per-column min-max scaler with strict train-only statistics.

    Unlike a clipping scaler, transform of out-of-range values extrapolates
    linearly — unseen test values land outside [0, 1] on purpose, and the
    consuming model decides how to treat them.

    Attributes
    ----------
    scales_ : list of FuzzyScale, one per column.
    n_features_in_ : int
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=2)
        self.scales_ = [fuzzify(X[:, j])[1] for j in range(X.shape[1])]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "scales_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(
                f"expected {self.n_features_in_} columns, got {X.shape[1]}"
            )
        columns = [apply_scale(X[:, j], s) for j, s in enumerate(self.scales_)]
        return np.column_stack(columns)

    def inverse_transform(self, X):
        check_is_fitted(self, "scales_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(
                f"expected {self.n_features_in_} columns, got {X.shape[1]}"
            )
        columns = [defuzzify(X[:, j], s) for j, s in enumerate(self.scales_)]
        return np.column_stack(columns)


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

def split(records, train_fraction: float = 0.8, mode: str = "chronological"):
    """Chronological prefix/suffix split (no shuffling — this is a time series)."""
    if mode != "chronological":
        raise ParameterError(f"unsupported split mode {mode!r}")
    if not (0.0 < train_fraction < 1.0) or not math.isfinite(train_fraction):
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(records)
    # Tiny epsilon so an exactly-representable product like 100 * 0.29
    # doesn't floor to one less from float rounding.
    n_train = int(math.floor(n * train_fraction + 1e-9))
    if n_train < 1 or n - n_train < 1:
        raise SplitError(
            f"splitting {n} records at fraction {train_fraction} would leave an empty side"
        )
    return list(records[:n_train]), list(records[n_train:])


# ---------------------------------------------------------------------------
# Fetching
# ---------------------------------------------------------------------------

def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled offline snapshot ("india" or "usa")."""
    if name not in BUNDLED_SOURCES:
        raise FetchError(f"no bundled source named {name!r}; available: {BUNDLED_SOURCES}")
    return Path(str(resources.files("qregress") / "fixtures" / f"{name}.csv"))


def fetch_remote(url, timeout: float = 10.0) -> bytes:
    """Return the raw bytes behind a URL, file:// URL, or plain file path.

    Never parses — that is :func:`parse_timeseries`'s job.  Raises
    FetchError for network failures, timeouts, non-200 responses (with the
    status attached), and unreadable files.
    """
    url = str(url)
    scheme = urllib.parse.urlparse(url).scheme
    if scheme in ("http", "https"):
        try:
            response = requests.get(url, timeout=timeout)
        except requests.RequestException as exc:
            raise FetchError(f"fetching {url} failed: {exc}") from exc
        if response.status_code != 200:
            raise FetchError(
                f"fetching {url} returned HTTP {response.status_code}",
                status=response.status_code,
            )
        return response.content

    if scheme == "file":
        path = urllib.request.url2pathname(urllib.parse.urlparse(url).path)
    else:
        path = url  # bare filesystem path for air-gapped runs
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FetchError(f"reading {path!r} failed: {exc}") from exc
