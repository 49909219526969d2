"""Drawdown-protection cost and the concave efficient frontier.

An investor who caps losses at a drawdown level D effectively owns a put
struck at ``1 - D`` on terminal wealth. Its actuarial cost under the
real-world discrete pdf,

    cost = E[ max((1 - D) - W_N, 0) ],    W_N = prod_{t<=N} (1 + f * X_t),

is charged against the expected return; leverage financing above 1x adds a
linear spread. Both charges bend the straight capital-allocation line into
a concave frontier.

Pricing is actuarial, not risk-neutral: the toy pdf has no risk-neutral
calibration, so the cost is the plain expected shortfall of terminal
wealth below the floor. The floor applies to terminal wealth (a vanilla
put); a running-minimum barrier variant is available through the simulate
module's drawdown statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleLeverage, ValidationError
from .model import (
    DiscreteModel,
    GaussianCore,
    TailSpec,
    NO_TAILS,
    build_discrete_model,
)

ENUMERATION_LIMIT = 200_000
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DdvaQuote:
    """Cost of protecting N periods of compounding against a drawdown > D."""

    drawdown_level: float
    horizon: int
    cost: float
    method: str = "enumeration"
    std_error: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.cost <= 1.0):
            raise ValidationError(f"cost {self.cost} outside [0, 1]")


@dataclass(frozen=True)
class FrontierPoint:
    leverage: float
    volatility: float
    gross_return: float
    protection_cost: float
    financing_cost: float
    net_return: float
    feasible: bool = True


def _count_vectors(n: int, k: int):
    # all k-part compositions of n
    if k == 1:
        yield (n,)
        return
    for head in range(n + 1):
        for rest in _count_vectors(n - head, k - 1):
            yield (head,) + rest


def _enumeration_size(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def ddva(
    model: DiscreteModel,
    f: float,
    drawdown: float,
    horizon: int,
    seed: int = 0,
    n_samples: int = 1_000_000,
) -> DdvaQuote:
    """DrawDown Valuation Adjustment: expected terminal shortfall below 1-D.

    Exact enumeration over outcome-count multinomials when the composition
    count ``C(N+k-1, k-1)`` stays within 200000; otherwise a seeded Monte
    Carlo over multinomial draws (terminal wealth depends on outcome counts
    only), reporting the standard error of the estimate.
    """
    if not (0 < drawdown < 1):
        raise ValidationError(f"drawdown must be in (0, 1), got {drawdown}")
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    v = model.values()
    factors = 1.0 + f * v
    if np.any(factors <= 0):
        raise InfeasibleLeverage(
            f"leverage {f} produces a non-positive wealth factor"
        )
    p = model.probabilities()
    step_logs = np.log(factors)
    strike = 1.0 - drawdown
    k = len(v)

    if _enumeration_size(horizon, k) <= ENUMERATION_LIMIT:
        log_p = np.log(p)
        lgam = [math.lgamma(i + 1) for i in range(horizon + 1)]
        cost = 0.0
        for counts in _count_vectors(horizon, k):
            wealth = math.exp(sum(c * s for c, s in zip(counts, step_logs)))
            if wealth < strike:
                log_prob = (
                    lgam[horizon]
                    - sum(lgam[c] for c in counts)
                    + sum(c * lp for c, lp in zip(counts, log_p))
                )
                cost += math.exp(log_prob) * (strike - wealth)
        return DdvaQuote(
            drawdown_level=drawdown, horizon=horizon, cost=cost,
            method="enumeration", std_error=0.0,
        )

    key = np.array([seed & _MASK64, 0], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining > 0:
        chunk = min(remaining, 1_000_000)
        counts = gen.multinomial(horizon, p, size=chunk)
        payoff = np.maximum(strike - np.exp(counts @ step_logs), 0.0)
        total += float(payoff.sum())
        total_sq += float((payoff * payoff).sum())
        remaining -= chunk
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    se = math.sqrt(var / n_samples)
    return DdvaQuote(
        drawdown_level=drawdown, horizon=horizon, cost=mean,
        method="monte_carlo", std_error=se,
    )


def frontier_curve(
    mu0: float,
    sigma0: float,
    tails: TailSpec | None,
    drawdown: float,
    horizon: int,
    spread: float,
    leverage_grid,
    seed: int = 0,
) -> list[FrontierPoint]:
    """Protection-adjusted return at each leverage on the grid.

    Each point scales the base model's outcomes by the leverage, prices the
    drawdown protection via :func:`ddva` (amortized per period as cost/N),
    and charges ``spread * max(leverage - 1, 0)`` for financing:

        net = leverage * mu0 - cost/N - financing

    Grid leverages that ruin some outcome are marked ``feasible=False``.
    """
    model = build_discrete_model(GaussianCore(mu=mu0, sigma=sigma0), tails or NO_TAILS)
    points = []
    for lev in leverage_grid:
        lev = float(lev)
        gross = lev * mu0
        financing = spread * max(lev - 1.0, 0.0)
        try:
            quote = ddva(model, lev, drawdown, horizon, seed=seed)
        except InfeasibleLeverage:
            points.append(
                FrontierPoint(
                    leverage=lev, volatility=lev * sigma0, gross_return=gross,
                    protection_cost=float("nan"), financing_cost=financing,
                    net_return=float("nan"), feasible=False,
                )
            )
            continue
        per_period = quote.cost / horizon
        points.append(
            FrontierPoint(
                leverage=lev,
                volatility=lev * sigma0,
                gross_return=gross,
                protection_cost=per_period,
                financing_cost=financing,
                net_return=gross - per_period - financing,
            )
        )
    return points


def frontier_family(
    mu0: float,
    sigma0: float,
    tails: TailSpec,
    drawdown: float,
    horizon: int,
    spread: float,
    leverage_grid,
    seed: int = 0,
) -> dict[str, list[FrontierPoint]]:
    """The three comparison curves behind the concave-frontier picture.

    ``no_tail`` uses the bare two-point core; ``symmetric`` mirrors the
    left tail onto the right (beta = alpha, ETW = ETL), isolating the
    convexity effect; ``skewed`` uses the left tail alone, adding the skew
    effect on top.
    """
    variants = {
        "no_tail": None,
        "symmetric": TailSpec(
            alpha=tails.alpha, etl=tails.etl, beta=tails.alpha, etw=tails.etl
        ),
        "skewed": TailSpec(alpha=tails.alpha, etl=tails.etl),
    }
    return {
        name: frontier_curve(
            mu0, sigma0, spec, drawdown, horizon, spread, leverage_grid, seed=seed
        )
        for name, spec in variants.items()
    }


def frontier_concavity_check(
    points: list[FrontierPoint], tol: float = 1e-10
) -> tuple[bool, float]:
    """True iff all discrete second differences of net return are <= tol.

    Needs at least three points with strictly increasing volatility; the
    second value returned is the largest (most convex) second difference.
    """
    pts = [p for p in points if p.feasible]
    if len(pts) < 3:
        raise ValidationError("concavity check needs at least 3 feasible points")
    vol = np.array([p.volatility for p in pts])
    if np.any(np.diff(vol) <= 0):
        raise ValidationError("volatility must be strictly increasing")
    net = np.array([p.net_return for p in pts])
    second = net[2:] - 2.0 * net[1:-1] + net[:-2]
    worst = float(second.max())
    return worst <= tol, worst
