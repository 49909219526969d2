"""Parameter estimation from a historical return series.

The tails are read off the empirical quantiles: everything strictly below
the q-quantile is the loss tail (probability alpha, size ETL = mean loss
magnitude), everything strictly above the (1-q)-quantile is the win tail.
The center is then re-derived so the implied discrete model reproduces the
full-sample mean and variance exactly (quantiles use the usual linear
interpolation between order statistics, numpy's default).

ETL/ETW are measured from zero (mean |return| over the tail bucket), not
as exceedances beyond the threshold, because the tail sizes enter the
growth function as absolute capital losses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyFileError,
    EstimationError,
    KellyTailsError,
    ReturnsParseError,
    SeriesTooShort,
    ValidationError,
)
from .model import GaussianCore, TailSpec, match_center_to_moments

MIN_OBSERVATIONS = 30


@dataclass(frozen=True)
class ReturnSeries:
    """Ordered per-period simple returns (fractions, each > -1)."""

    values: tuple[float, ...]
    period_label: str = ""

    def __post_init__(self):
        if not self.values:
            raise ValidationError("return series is empty")
        for i, v in enumerate(self.values):
            if not v > -1.0:
                raise ValidationError(
                    f"return at position {i} is {v}; must exceed -1"
                )

    def __len__(self):
        return len(self.values)


def estimate_params(
    series: ReturnSeries, tail_quantile: float = 0.05
) -> tuple[GaussianCore, TailSpec, dict]:
    """Estimate (GaussianCore, TailSpec) from observed returns.

    Returns the core, the tails, and a diagnostics dict carrying the
    thresholds, the interior mean/std before moment matching, degenerate
    tail flags, and the positive-edge flag.

    Raises
    ------
    SeriesTooShort
        Fewer than 30 observations.
    EstimationError
        The matched parameters do not form a valid model (e.g. a constant
        series leaves no center variance).
    """
    if len(series) < MIN_OBSERVATIONS:
        raise SeriesTooShort(
            f"{len(series)} observations; estimation needs >= {MIN_OBSERVATIONS}"
        )
    if not (0 < tail_quantile <= 0.25):
        raise ValidationError(
            f"tail_quantile must be in (0, 0.25], got {tail_quantile}"
        )
    x = np.asarray(series.values, dtype=float)
    lo = float(np.quantile(x, tail_quantile))
    hi = float(np.quantile(x, 1.0 - tail_quantile))
    losses = x[x < lo]
    wins = x[x > hi]
    interior = x[(x >= lo) & (x <= hi)]

    alpha = len(losses) / len(x)
    etl = float(np.mean(np.abs(losses))) if len(losses) else 0.0
    beta = len(wins) / len(x)
    etw = float(np.mean(wins)) if len(wins) else 0.0
    degenerate = []
    if len(losses) == 0:
        alpha, etl = 0.0, 0.0
        degenerate.append("left")
    if len(wins) == 0 or etw <= 0:
        beta, etw = 0.0, 0.0
        if len(wins) == 0:
            degenerate.append("right")

    full_mean = float(np.mean(x))
    full_std = float(np.std(x))
    try:
        tails = TailSpec(alpha=alpha, etl=etl, beta=beta, etw=etw)
        core = match_center_to_moments(full_mean, full_std, tails)
    except KellyTailsError as exc:
        raise EstimationError(f"estimated parameters invalid: {exc}") from exc

    diagnostics = {
        "n_observations": len(x),
        "tail_quantile": tail_quantile,
        "left_threshold": lo,
        "right_threshold": hi,
        "interior_mean": float(np.mean(interior)) if len(interior) else float("nan"),
        "interior_std": float(np.std(interior)) if len(interior) else float("nan"),
        "full_mean": full_mean,
        "full_std": full_std,
        "degenerate_tails": tuple(degenerate),
        "positive_edge": tails.positive_edge(core.mu),
    }
    return core, tails, diagnostics


def _parse_value(text: str, line_no: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ReturnsParseError(line_no) from None


def read_returns_csv(path) -> ReturnSeries:
    """Load returns from a CSV file.

    Accepts either one numeric value per line or a table with a header row
    and a column named ``return`` (any case). Non-numeric data rows raise
    ReturnsParseError with the offending line number.
    """
    with open(path, newline="") as handle:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(handle)) if row]
    rows = [(n, [c.strip() for c in row]) for n, row in rows]
    rows = [(n, row) for n, row in rows if any(row)]
    if not rows:
        raise EmptyFileError(f"{path}: no data rows")

    first_line, first = rows[0]
    header_names = [c.lower() for c in first]
    col = header_names.index("return") if "return" in header_names else None
    if col is not None:
        data = rows[1:]
        if not data:
            raise EmptyFileError(f"{path}: header but no data rows")
        values = []
        for line_no, row in data:
            if col >= len(row):
                raise ReturnsParseError(line_no, f"line {line_no}: missing return column")
            values.append(_parse_value(row[col], line_no))
    else:
        values = []
        for line_no, row in rows:
            if len(row) != 1:
                raise ReturnsParseError(
                    line_no,
                    f"line {line_no}: expected a single value or a 'return' column",
                )
            values.append(_parse_value(row[0], line_no))
    return ReturnSeries(values=tuple(values))
