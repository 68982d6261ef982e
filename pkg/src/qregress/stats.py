"""Model-vs-actual comparison statistics and file-based reporting.

The headline operation is a two-tailed t-test between a predicted series and
the actual one: a well-fitted model produces statistically indistinguishable
means, i.e. a statistic near 0 and a p-value near 1.  Welch's unequal-variance
form is the default since there is no reason to expect a model's output to
share the data's variance; the pooled Student form sits behind a flag for
sensitivity checks.

The p-value comes from the t-distribution CDF evaluated through a hand-rolled
regularized incomplete beta function (continued fraction), so the scipy
implementations stay available as genuinely independent test oracles.

Reporting is file-based and deterministic: SVG line charts with a sibling CSV
of the raw series, and an aligned-text / CSV comparison table.  All CSV
numbers use plain ``.`` decimals with 6 significant digits.
"""

import csv
import io
import math
import os
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import DimensionError, ParameterError

__all__ = [
    "TTestReport",
    "Metrics",
    "ComparisonTable",
    "t_test_two_tailed",
    "metrics",
    "regularized_incomplete_beta",
    "emit_plot",
    "comparison_table",
]


@dataclass(frozen=True)
class TTestReport:
    """Outcome of a two-tailed t-test between two samples."""

    statistic: float
    p_value: float
    df: float
    n_a: int
    n_b: int


@dataclass(frozen=True)
class Metrics:
    """Pointwise regression error summary."""

    mse: float
    mae: float
    n: int


@dataclass(frozen=True)
class ComparisonTable:
    """A rendered comparison table: aligned text plus CSV of the same rows."""

    text: str
    csv: str


# ---------------------------------------------------------------------------
# Incomplete beta (t-distribution CDF backend)
# ---------------------------------------------------------------------------

_BETACF_MAX_ITER = 300
_BETACF_EPS = 1e-15
_BETACF_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz's method."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        # Even step.
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        # Odd step.
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed to converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ParameterError(f"shape parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the continued fraction on the side where it converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _student_t_two_tailed_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ t(df), via I_x(df/2, 1/2) at x = df/(df + t^2)."""
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


# ---------------------------------------------------------------------------
# t-test and metrics
# ---------------------------------------------------------------------------

def t_test_two_tailed(a, b, equal_var: bool = False) -> TTestReport:
    """Two-tailed t-test of mean equality between samples ``a`` and ``b``.

    Parameters
    ----------
    a, b : sequences of real numbers, each of length >= 2.
    equal_var : bool
        False (default) uses Welch's unequal-variance statistic with
        Welch–Satterthwaite degrees of freedom; True uses the pooled
        Student form.

    Returns
    -------
    TTestReport

    Notes
    -----
    Two samples with zero variance and equal means compare as statistic 0,
    p-value 1 (a defined outcome, not an error); zero variance with
    differing means leaves the statistic undefined and raises.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1:
        raise DimensionError("samples must be one-dimensional")
    n_a, n_b = a.size, b.size
    if n_a < 2 or n_b < 2:
        raise DimensionError(f"each sample needs at least 2 values, got {n_a} and {n_b}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ParameterError("samples must be finite")

    var_a = float(a.var(ddof=1))
    var_b = float(b.var(ddof=1))
    diff = float(a.mean()) - float(b.mean())

    if equal_var:
        df = float(n_a + n_b - 2)
        pooled = ((n_a - 1) * var_a + (n_b - 1) * var_b) / df
        se = math.sqrt(pooled * (1.0 / n_a + 1.0 / n_b))
    else:
        term_a = var_a / n_a
        term_b = var_b / n_b
        se = math.sqrt(term_a + term_b)
        if se > 0.0:
            df = (term_a + term_b) ** 2 / (
                term_a**2 / (n_a - 1) + term_b**2 / (n_b - 1)
            )
        else:
            df = float(n_a + n_b - 2)

    if se == 0.0:
        if diff == 0.0:
            return TTestReport(0.0, 1.0, float(n_a + n_b - 2), n_a, n_b)
        raise ParameterError(
            "both samples have zero variance but different means; the statistic is undefined"
        )

    statistic = diff / se
    p_value = _student_t_two_tailed_p(statistic, df)
    return TTestReport(statistic, p_value, df, n_a, n_b)


def metrics(predicted, actual) -> Metrics:
    """Mean squared error and mean absolute error of a prediction."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise DimensionError(
            f"predicted and actual must be 1-d of equal length, got {predicted.shape} and {actual.shape}"
        )
    if predicted.size < 1:
        raise DimensionError("at least one sample is required")
    residual = predicted - actual
    return Metrics(
        mse=float(np.mean(residual**2)),
        mae=float(np.mean(np.abs(residual))),
        n=predicted.size,
    )


# ---------------------------------------------------------------------------
# Plot emission
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")

_VIEW_W, _VIEW_H = 640.0, 400.0
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 60.0, 20.0, 20.0, 40.0


def _fmt(value: float) -> str:
    return format(float(value), ".6g")


def _validated_series(series) -> list[tuple[str, np.ndarray, np.ndarray]]:
    if not series:
        raise DimensionError("at least one series is required")
    cleaned = []
    for name, (xs, ys) in series.items():
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise DimensionError(f"series {name!r}: x and y must be 1-d of equal length")
        if xs.size == 0:
            raise DimensionError(f"series {name!r} is empty")
        cleaned.append((str(name), xs, ys))
    return cleaned


def _scale(values, lo, hi, out_lo, out_hi):
    if hi == lo:
        return np.full_like(values, (out_lo + out_hi) / 2.0)
    return out_lo + (values - lo) / (hi - lo) * (out_hi - out_lo)


def _render_svg(cleaned) -> str:
    x_lo = min(float(xs.min()) for _, xs, _ in cleaned)
    x_hi = max(float(xs.max()) for _, xs, _ in cleaned)
    y_lo = min(float(ys.min()) for _, _, ys in cleaned)
    y_hi = max(float(ys.max()) for _, _, ys in cleaned)

    plot_l, plot_r = _MARGIN_L, _VIEW_W - _MARGIN_R
    plot_t, plot_b = _MARGIN_T, _VIEW_H - _MARGIN_B

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_VIEW_W:g} {_VIEW_H:g}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_VIEW_W:g}" height="{_VIEW_H:g}" fill="white"/>',
        f'<rect x="{plot_l:g}" y="{plot_t:g}" width="{plot_r - plot_l:g}" '
        f'height="{plot_b - plot_t:g}" fill="none" stroke="#333333"/>',
    ]
    # Range labels on the axes.
    parts.append(f'<text x="{plot_l:g}" y="{plot_b + 16:g}">{escape(_fmt(x_lo))}</text>')
    parts.append(
        f'<text x="{plot_r:g}" y="{plot_b + 16:g}" text-anchor="end">{escape(_fmt(x_hi))}</text>'
    )
    parts.append(
        f'<text x="{plot_l - 6:g}" y="{plot_b:g}" text-anchor="end">{escape(_fmt(y_lo))}</text>'
    )
    parts.append(
        f'<text x="{plot_l - 6:g}" y="{plot_t + 10:g}" text-anchor="end">{escape(_fmt(y_hi))}</text>'
    )

    for i, (name, xs, ys) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        px = _scale(xs, x_lo, x_hi, plot_l, plot_r)
        py = _scale(ys, y_lo, y_hi, plot_b, plot_t)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        if xs.size == 1:
            parts.append(f'<circle cx="{px[0]:.2f}" cy="{py[0]:.2f}" r="3" fill="{color}"/>')
        else:
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
            )
        legend_y = plot_t + 14 + 16 * i
        parts.append(
            f'<rect x="{plot_l + 8:g}" y="{legend_y - 9:g}" width="10" height="10" fill="{color}"/>'
        )
        parts.append(f'<text x="{plot_l + 22:g}" y="{legend_y:g}">{escape(name)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(series, path, kind: str = "line"):
    """Write a line chart as SVG plus a sibling CSV of the raw series.

    Parameters
    ----------
    series : mapping of name -> (x values, y values)
        Insertion order fixes color assignment and CSV column order.
    path : str or path-like
        Destination of the SVG; the CSV lands next to it with a ``.csv``
        suffix.
    kind : str
        Only ``"line"`` is supported.

    Returns
    -------
    (svg_path, csv_path) : tuple of str

    Output is byte-deterministic for identical inputs: no timestamps, no
    environment-dependent content.
    """
    if kind != "line":
        raise ParameterError(f"unsupported plot kind {kind!r}")
    cleaned = _validated_series(series)

    svg_path = os.fspath(path)
    csv_path = os.path.splitext(svg_path)[0] + ".csv"

    with open(svg_path, "w", newline="") as fh:
        fh.write(_render_svg(cleaned))

    longest = max(xs.size for _, xs, _ in cleaned)
    header = []
    for name, _, _ in cleaned:
        header += [f"{name}_x", f"{name}_y"]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row_idx in range(longest):
            row = []
            for _, xs, ys in cleaned:
                if row_idx < xs.size:
                    row += [_fmt(xs[row_idx]), _fmt(ys[row_idx])]
                else:
                    row += ["", ""]
            writer.writerow(row)
    return svg_path, csv_path


# ---------------------------------------------------------------------------
# Comparison table
# ---------------------------------------------------------------------------

def comparison_table(reports) -> ComparisonTable:
    """Render per-dataset, per-model t-test results as text and CSV.

    Parameters
    ----------
    reports : mapping of (dataset label, model name) -> TTestReport
        Rows are dataset labels, columns are (statistic, p-value) per model,
        both in first-appearance order.  A missing (dataset, model) cell is
        rendered blank.
    """
    if not reports:
        raise DimensionError("at least one report is required")

    datasets: list[str] = []
    models: list[str] = []
    for dataset, model in reports:
        if dataset not in datasets:
            datasets.append(dataset)
        if model not in models:
            models.append(model)

    header = ["Dataset"]
    for model in models:
        header += [f"{model} statistic", f"{model} p-value"]

    rows = []
    for dataset in datasets:
        row = [dataset]
        for model in models:
            report = reports.get((dataset, model))
            if report is None:
                row += ["", ""]
            else:
                row += [_fmt(report.statistic), _fmt(report.p_value)]
        rows.append(row)

    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
    lines = []
    for cells in [header, *rows]:
        padded = [cells[0].ljust(widths[0])] + [
            cells[c].rjust(widths[c]) for c in range(1, len(cells))
        ]
        lines.append("  ".join(padded).rstrip())
    text = "\n".join(lines) + "\n"

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return ComparisonTable(text=text, csv=buffer.getvalue())
