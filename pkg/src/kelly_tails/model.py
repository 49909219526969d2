"""Domain types and construction of the discrete per-period outcome pdf.

The per-period return of a leveraged position is modeled by a small discrete
distribution: a symmetric two-point core (mu +/- sigma) carrying the
"normal volatility" risk, plus up to two tail states -- a loss of size ETL
with probability alpha and a win of size ETW with probability beta -- carrying
the uncertainty. All quantities are dimensionless fractions of capital per
period (0.02 means 2%).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    ApproximationWarning,
    CalibrationInfeasible,
    SingularCovariance,
    ValidationError,
)

PROB_TOL = 1e-12
SYM_TOL = 1e-12


@dataclass(frozen=True)
class GaussianCore:
    """Center-of-distribution parameters.

    Parameters
    ----------
    mu : per-period excess return
    sigma : per-period volatility; must exceed ``|mu|``

    A soft warning is emitted when ``sigma <= 5 * mu``: the closed-form
    approximations assume sigma >> mu, although the exact optimizer stays
    valid there.
    """

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if not (self.sigma > abs(self.mu)):
            raise ValidationError(
                f"sigma={self.sigma} must exceed |mu|={abs(self.mu)}"
            )
        if self.sigma <= 5 * self.mu:
            warnings.warn(
                f"sigma={self.sigma} <= 5*mu={5 * self.mu}: closed-form "
                "approximations assume sigma >> mu",
                ApproximationWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class TailSpec:
    """Tail parameters: loss of size ``etl`` with probability ``alpha``,
    win of size ``etw`` with probability ``beta``. Sizes are positive
    fractions of capital."""

    alpha: float = 0.0
    etl: float = 0.0
    beta: float = 0.0
    etw: float = 0.0

    def __post_init__(self):
        if not (0 <= self.alpha < 1):
            raise ValidationError(f"alpha must be in [0, 1), got {self.alpha}")
        if not (0 <= self.beta < 1):
            raise ValidationError(f"beta must be in [0, 1), got {self.beta}")
        if self.alpha + self.beta >= 1:
            raise ValidationError(
                f"alpha + beta must be < 1, got {self.alpha + self.beta}"
            )
        if self.etl < 0 or self.etw < 0:
            raise ValidationError("tail sizes etl, etw must be >= 0")

    @property
    def empty(self) -> bool:
        return self.alpha == 0 and self.beta == 0

    def positive_edge(self, mu: float) -> bool:
        """Expected center gain exceeds the expected tail loss.

        The negative-edge regime is allowed (it is where shorting becomes
        optimal); this flag only reports it.
        """
        return self.alpha * self.etl < (1 - self.alpha) * mu


NO_TAILS = TailSpec()


@dataclass(frozen=True)
class DiscreteModel:
    """Per-period outcome pdf as ``(value, probability)`` pairs.

    Values are strictly increasing, zero-probability states are dropped,
    and probabilities sum to one within 1e-12. At most four states:
    tail loss, down, up, tail win.
    """

    outcomes: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.outcomes:
            raise ValidationError("model needs at least one outcome")
        vals = [v for v, _ in self.outcomes]
        probs = [p for _, p in self.outcomes]
        if any(p <= 0 for p in probs):
            raise ValidationError("probabilities must be positive")
        if abs(sum(probs) - 1.0) > PROB_TOL:
            raise ValidationError(
                f"probabilities sum to {sum(probs)}, not 1 within {PROB_TOL}"
            )
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("outcome values must be strictly increasing")

    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.outcomes])

    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.outcomes])

    def __len__(self) -> int:
        return len(self.outcomes)


class Alignment(Enum):
    """Joint-tail structure of a multi-asset spec."""

    COALIGNED = "coaligned"
    OPPOSED = "opposed"
    INDEPENDENT = "independent"
    NONE = "none"


@dataclass(frozen=True)
class PortfolioSpec:
    """Premium vector M, covariance C, and optional per-asset tails."""

    premiums: np.ndarray
    covariance: np.ndarray
    tails: tuple[TailSpec, ...] | None = None
    alignment: Alignment = Alignment.NONE

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.premiums, dtype=float))
        c = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        object.__setattr__(self, "premiums", m)
        object.__setattr__(self, "covariance", c)
        n = m.shape[0]
        if c.shape != (n, n):
            raise ValidationError(
                f"covariance shape {c.shape} does not match {n} premiums"
            )
        if np.max(np.abs(c - c.T)) > SYM_TOL:
            raise ValidationError("covariance must be symmetric within 1e-12")
        try:
            np.linalg.cholesky(c)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("covariance must be positive-definite") from exc
        if self.tails is not None and len(self.tails) != n:
            raise ValidationError(
                f"{len(self.tails)} tail specs for {n} assets"
            )

    @property
    def n_assets(self) -> int:
        return self.premiums.shape[0]


@dataclass(frozen=True)
class AllocationResult:
    """Leverage vector with its growth rate and per-asset diagnostics.

    ``diagnostics`` holds one record per asset with the asset's fraction,
    its premium contribution ``f_i * M_i`` and its variance contribution
    ``f_i * (C f)_i``.
    """

    fractions: np.ndarray
    total_leverage: float
    growth_rate: float
    feasible: bool = True
    diagnostics: tuple[dict, ...] = field(default_factory=tuple)

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.fractions, dtype=float))
        object.__setattr__(self, "fractions", f)
        if abs(self.total_leverage - float(f.sum())) > 1e-12:
            raise ValidationError("total_leverage must equal sum of fractions")


def build_discrete_model(core: GaussianCore, tails: TailSpec = NO_TAILS) -> DiscreteModel:
    """Assemble the 2-to-4-point outcome pdf from center and tail parameters.

    States: ``(-etl, alpha)``, ``(mu - sigma, c)``, ``(mu + sigma, c)``,
    ``(+etw, beta)`` with ``c = (1 - alpha - beta) / 2``. Zero-probability
    states are dropped; states are sorted by value; exact value collisions
    are merged. With no tails this reduces to the symmetric two-point pdf.
    """
    center_p = (1.0 - tails.alpha - tails.beta) / 2.0
    states = [
        (-tails.etl, tails.alpha),
        (core.mu - core.sigma, center_p),
        (core.mu + core.sigma, center_p),
        (tails.etw, tails.beta),
    ]
    states = [(v, p) for v, p in states if p > 0]
    states.sort(key=lambda s: s[0])
    merged: list[tuple[float, float]] = []
    for v, p in states:
        if merged and v == merged[-1][0]:
            merged[-1] = (v, merged[-1][1] + p)
        else:
            merged.append((v, p))
    return DiscreteModel(outcomes=tuple(merged))


def model_moments(model: DiscreteModel) -> tuple[float, float]:
    """Mean and variance of the outcome pdf by direct summation."""
    v = model.values()
    p = model.probabilities()
    mean = float(np.dot(p, v))
    var = float(np.dot(p, v * v) - mean * mean)
    return mean, max(var, 0.0)


def calibrate_center(mu0: float, sigma0: float, alpha: float, etl: float) -> GaussianCore:
    """Back out center parameters from observed moments and a left tail.

    Solves for ``(mu, sigma)`` such that the discrete model built with
    tail ``(alpha, etl)`` reproduces the observed mean ``mu0`` and variance
    ``sigma0**2`` exactly:

        mu      = (mu0 + alpha * etl) / (1 - alpha)
        sigma^2 = sigma0^2 / (1 - alpha) - alpha * (etl + mu)^2

    Raises
    ------
    CalibrationInfeasible
        When the implied sigma^2 <= 0 (tail too heavy for the observed
        variance).
    """
    if not (0 <= alpha < 1):
        raise ValidationError(f"alpha must be in [0, 1), got {alpha}")
    if sigma0 <= 0:
        raise ValidationError(f"sigma0 must be > 0, got {sigma0}")
    mu = (mu0 + alpha * etl) / (1.0 - alpha)
    var = sigma0 * sigma0 / (1.0 - alpha) - alpha * (etl + mu) ** 2
    if var <= 0:
        raise CalibrationInfeasible(
            f"alpha={alpha}, etl={etl} leave sigma^2={var} <= 0 "
            f"for observed sigma0={sigma0}"
        )
    return GaussianCore(mu=mu, sigma=float(np.sqrt(var)))


def match_center_to_moments(mu0: float, sigma0: float, tails: TailSpec) -> GaussianCore:
    """Two-sided generalization of :func:`calibrate_center`.

    Finds ``(mu, sigma)`` such that the full two-tail model matches the
    observed mean and variance. Equals ``calibrate_center`` when the right
    tail is empty.
    """
    if sigma0 <= 0:
        raise ValidationError(f"sigma0 must be > 0, got {sigma0}")
    a, b = tails.alpha, tails.beta
    center_mass = 1.0 - a - b
    mu = (mu0 + a * tails.etl - b * tails.etw) / center_mass
    second = sigma0 * sigma0 + mu0 * mu0
    var = (second - a * tails.etl**2 - b * tails.etw**2) / center_mass - mu * mu
    if var <= 0:
        raise CalibrationInfeasible(
            f"tails {tails} leave sigma^2={var} <= 0 for observed "
            f"(mu0={mu0}, sigma0={sigma0})"
        )
    return GaussianCore(mu=mu, sigma=float(np.sqrt(var)))


def solve_covariance(covariance: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``C x = rhs`` by factorization (never an explicit inverse)."""
    try:
        return np.linalg.solve(covariance, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(str(exc)) from exc
