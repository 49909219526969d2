"""Single-asset growth-optimal leverage.

Covers the binary Kelly formula, the Gaussian-limit fraction mu/sigma^2,
the fat-tail closed-form corrections, and the exact maximizer of the
discrete geometric growth function

    g(f) = sum_i p_i * ln(1 + f * v_i)

which is strictly concave on the open feasible interval where every
wealth factor ``1 + f * v_i`` stays positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, NoInteriorMaximum, ValidationError
from .model import (
    DiscreteModel,
    GaussianCore,
    TailSpec,
    NO_TAILS,
    build_discrete_model,
    calibrate_center,
)

DERIV_TOL = 1e-12
BRACKET_INSET = 1e-9


@dataclass(frozen=True)
class KellyPoint:
    """An (optimal fraction, growth rate) pair.

    For the exact operations ``growth`` is the growth function evaluated at
    ``fraction``; for the closed-form operation it is the paper-style
    approximate growth formula, which deliberately differs from the exact
    evaluation at higher order.
    """

    fraction: float
    growth: float


@dataclass(frozen=True)
class SweepRow:
    """One ETL grid point of a sweep: closed-form vs exact optimum."""

    etl: float
    f_closed: float
    f_exact: float
    g_closed: float
    g_exact: float
    feasible: bool = True


def kelly_binary(p: float, b: float) -> float:
    """Optimal bet fraction for an even-odds-style binary gamble.

    Win probability ``p`` pays ``b`` per unit wagered; returns
    ``(b*p - (1-p)) / b``. A negative value means the edge is negative
    (do not bet, or take the other side); it is returned raw.
    """
    if not (0 < p < 1):
        raise ValidationError(f"p must be in (0, 1), got {p}")
    if b <= 0:
        raise ValidationError(f"b must be > 0, got {b}")
    return (b * p - (1.0 - p)) / b


def growth_at(model: DiscreteModel, f: float) -> float:
    """Geometric growth rate ``sum_i p_i * ln(1 + f * v_i)`` at leverage f.

    Raises DomainViolation when any wealth factor ``1 + f*v_i`` is <= 0,
    i.e. the leverage ruins the position at that outcome.
    """
    v = model.values()
    args = 1.0 + f * v
    if np.any(args <= 0):
        bad = v[args <= 0][0]
        raise DomainViolation(
            f"leverage {f} wipes out capital at outcome {bad} (factor <= 0)"
        )
    return float(np.dot(model.probabilities(), np.log(args)))


def _growth_derivatives(model: DiscreteModel, f: float) -> tuple[float, float]:
    # g'(f) and g''(f); caller guarantees feasibility
    v = model.values()
    p = model.probabilities()
    a = 1.0 + f * v
    g1 = float(np.dot(p, v / a))
    g2 = float(-np.dot(p, (v / a) ** 2))
    return g1, g2


def feasible_interval(model: DiscreteModel) -> tuple[float, float]:
    """Open interval of leverages keeping every wealth factor positive."""
    v = model.values()
    lo = -np.inf if v.max() <= 0 else -1.0 / v.max()
    hi = np.inf if v.min() >= 0 else 1.0 / abs(v.min())
    return float(lo), float(hi)


def kelly_simple(core: GaussianCore) -> KellyPoint:
    """Growth-optimal fraction for the symmetric two-point core.

    The exact maximizer is ``mu / (sigma^2 - mu^2)`` (approximately
    mu/sigma^2 for sigma >> mu) and the optimal growth evaluates in closed
    form to ``-0.5 * ln(1 - mu^2/sigma^2)`` (approximately 0.5*mu^2/sigma^2).
    """
    mu, sigma = core.mu, core.sigma
    frac = mu / (sigma * sigma - mu * mu)
    growth = -0.5 * float(np.log1p(-(mu * mu) / (sigma * sigma)))
    return KellyPoint(fraction=frac, growth=growth)


def kelly_fat_closed(core: GaussianCore, tails: TailSpec) -> KellyPoint:
    """Closed-form fat-tail leverage and growth approximations.

    With tail mass ``c = 1 - alpha - beta``:

        f1 ~= (mu/sigma^2) * (1 + (beta*ETW - alpha*ETL) / (mu*c))
                           / (1 + (beta*ETW^2 + alpha*ETL^2) / (sigma^2*c))
        g1 ~= 0.5*c * mu^2 * (1 + (beta*ETW - alpha*ETL)/(mu*c))^2
                    / (sigma^2 * (1 + (beta*ETW^2 + alpha*ETL^2)/(sigma^2*c)))

    The skew numerator is evaluated in the expanded form
    ``mu + (beta*ETW - alpha*ETL)/c`` so mu = 0 is handled without a 0/0.
    With beta = ETW = 0 this is identical to the one-sided formula; with no
    tails it reduces to mu/sigma^2 and 0.5*mu^2/sigma^2.
    """
    mu, s2 = core.mu, core.sigma**2
    c = 1.0 - tails.alpha - tails.beta
    skew_shift = (tails.beta * tails.etw - tails.alpha * tails.etl) / c
    convexity = 1.0 + (tails.beta * tails.etw**2 + tails.alpha * tails.etl**2) / (s2 * c)
    frac = (mu + skew_shift) / (s2 * convexity)
    growth = 0.5 * c * (mu + skew_shift) ** 2 / (s2 * convexity)
    return KellyPoint(fraction=frac, growth=growth)


def kelly_fat_exact(model: DiscreteModel) -> KellyPoint:
    """Exact growth maximizer of the discrete model.

    g is strictly concave and g' is strictly decreasing on the open feasible
    interval, diverging to +inf/-inf at the endpoints whenever outcomes of
    both signs are present, so the unique root of g' is found by bisection
    (bracketed 1e-9 inside the endpoints) and polished by Newton steps to
    |g'(f)| < 1e-12. Negative fractions (shorting) come out naturally.

    Raises NoInteriorMaximum when all outcomes share one sign (g monotone).
    """
    v = model.values()
    if v.max() <= 0 or v.min() >= 0:
        raise NoInteriorMaximum(
            "all outcomes have the same sign; growth is monotone in f"
        )
    lo, hi = feasible_interval(model)
    width = hi - lo
    a = lo + BRACKET_INSET * width
    b = hi - BRACKET_INSET * width
    ga, _ = _growth_derivatives(model, a)
    gb, _ = _growth_derivatives(model, b)
    if ga < 0 or gb > 0:  # root pushed into the 1e-9 inset; clamp there
        f = a if ga < 0 else b
        return KellyPoint(fraction=f, growth=growth_at(model, f))
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm, _ = _growth_derivatives(model, mid)
        if gm > 0:
            a = mid
        else:
            b = mid
        if abs(gm) < DERIV_TOL or (b - a) < 1e-16 * max(1.0, abs(mid)):
            break
    f = 0.5 * (a + b)
    for _ in range(8):  # Newton polish
        g1, g2 = _growth_derivatives(model, f)
        if abs(g1) < DERIV_TOL:
            break
        step = -g1 / g2
        cand = f + step
        if not (lo < cand < hi):
            break
        f = cand
    return KellyPoint(fraction=f, growth=growth_at(model, f))


def tail_impact(core: GaussianCore, tails: TailSpec) -> float:
    """Tail impact parameter ``2*alpha*ETL / (mu * (1 - alpha))``.

    Values of order one signal that the tail loss erodes the growth rate
    materially (the growth rate itself turns negative well before the
    arithmetic edge does).
    """
    if core.mu <= 0:
        raise ValidationError("tail impact is defined for mu > 0")
    return 2.0 * tails.alpha * tails.etl / (core.mu * (1.0 - tails.alpha))


def arithmetic_growth(core: GaussianCore, tails: TailSpec = NO_TAILS) -> dict:
    """Arithmetic (single-period expected) growth and the f=1 log-drift.

    Returns ``rate = (1 - alpha)*mu - alpha*ETL`` together with the no-tail
    full-leverage log-drift diagnostic ``mu - sigma^2/2``, which is negative
    whenever holding the unlevered asset loses in the geometric sense.
    """
    rate = (1.0 - tails.alpha) * core.mu - tails.alpha * tails.etl
    log_drift = core.mu - 0.5 * core.sigma**2
    return {"rate": rate, "log_drift_full_leverage": log_drift}


def etl_sweep(
    mu0: float,
    sigma0: float,
    alpha: float,
    etl_grid,
    mode: str = "recalibrated",
) -> list[SweepRow]:
    """Closed-form vs exact optimum as the tail loss size grows.

    mode="recalibrated" (default): each grid point re-derives the center
    (mu, sigma) from the observed moments (mu0, sigma0) via
    :func:`calibrate_center`, so every row's model has mean mu0 and variance
    sigma0^2 exactly. Rows whose calibration is infeasible are marked
    ``feasible=False`` with NaN entries.

    mode="fixed-center": (mu0, sigma0) are used directly as the center
    (mu, sigma) of every row. This is the configuration under which the
    optimal fraction decays with ETL and switches sign smoothly once the
    expected tail loss overwhelms the center drift.
    """
    if mode not in ("recalibrated", "fixed-center"):
        raise ValidationError(f"unknown sweep mode {mode!r}")
    rows = []
    for etl in etl_grid:
        tails = TailSpec(alpha=alpha, etl=float(etl))
        try:
            if mode == "recalibrated":
                core = calibrate_center(mu0, sigma0, alpha, float(etl))
            else:
                core = GaussianCore(mu=mu0, sigma=sigma0)
            model = build_discrete_model(core, tails)
            closed = kelly_fat_closed(core, tails)
            exact = kelly_fat_exact(model)
        except Exception:
            rows.append(
                SweepRow(
                    etl=float(etl),
                    f_closed=float("nan"),
                    f_exact=float("nan"),
                    g_closed=float("nan"),
                    g_exact=float("nan"),
                    feasible=False,
                )
            )
            continue
        rows.append(
            SweepRow(
                etl=float(etl),
                f_closed=closed.fraction,
                f_exact=exact.fraction,
                g_closed=closed.growth,
                g_exact=exact.growth,
            )
        )
    return rows


def sigma_sensitivity(g_of_sigma, sigma: float, rel_step: float = 1e-4) -> dict:
    """Central finite differences of a growth curve g(sigma).

    Returns dg/dsigma, d2g/dsigma2 and the scaling factor
    ``Z_g = -dg/dsigma + 2*sigma*d2g/dsigma2`` that maps volatility skew and
    convexity onto growth skew and convexity.
    """
    h = rel_step * sigma
    gp = g_of_sigma(sigma + h)
    gm = g_of_sigma(sigma - h)
    g0 = g_of_sigma(sigma)
    d1 = (gp - gm) / (2.0 * h)
    d2 = (gp - 2.0 * g0 + gm) / (h * h)
    return {
        "dg_dsigma": d1,
        "d2g_dsigma2": d2,
        "z_g": -d1 + 2.0 * sigma * d2,
    }


def growth_sensitivity(core: GaussianCore, rel_step: float = 1e-4) -> dict:
    """Volatility sensitivities of the exact no-tail growth optimum.

    Differentiates sigma -> g*(sigma) (the optimal growth of the two-point
    core at fixed mu) by central finite differences with the given relative
    step. The optimal growth falls as volatility rises (negative skew) and
    does so with positive curvature (positive convexity); both are scaled
    into growth-vs-underlying terms by the factor Z_g.
    """

    def g_star(s):
        return kelly_simple(GaussianCore(mu=core.mu, sigma=s)).growth

    return sigma_sensitivity(g_star, core.sigma, rel_step)


def scale_skew_convexity(z_g: float, skew_sigma: float, convexity_sigma: float) -> tuple[float, float]:
    """Map volatility skew/convexity to growth skew/convexity via Z_g."""
    return z_g * skew_sigma, z_g * convexity_sigma


def scenario_growth(spec, f: float) -> tuple[float, float]:
    """Deterministic wealth multiple of a fixed bet tally.

    ``spec`` is a sequence of ``(count, outcome_per_unit_bet)`` pairs; the
    multiple is ``prod (1 + f*outcome)^count`` and the per-bet growth rate is
    its log divided by the total bet count.
    """
    total = 0
    log_mult = 0.0
    for count, outcome in spec:
        if count < 0:
            raise ValidationError("bet counts must be >= 0")
        factor = 1.0 + f * outcome
        if factor <= 0 and count > 0:
            raise DomainViolation(
                f"bet outcome {outcome} at fraction {f} wipes out capital"
            )
        if count:
            log_mult += count * float(np.log(factor))
            total += count
    if total == 0:
        return 1.0, 0.0
    return float(np.exp(log_mult)), log_mult / total


def brown_scenarios(convention: str = "replace") -> dict[str, tuple[tuple[int, float], ...]]:
    """The 100-even-bet tally (60 wins, 40 losses) and its tail variants.

    Variants add one triple-sized loss (``tail_loss``), one triple-sized win
    (``tail_win``), or both (``both_tails``). Under the default "replace"
    convention the tail event replaces one normal bet so the total count
    stays at 100; under "append" it is added on top.
    """
    if convention not in ("replace", "append"):
        raise ValidationError(f"unknown convention {convention!r}")
    r = convention == "replace"
    base = ((60, 1.0), (40, -1.0))
    return {
        "base": base,
        "tail_loss": ((60, 1.0), (39 if r else 40, -1.0), (1, -3.0)),
        "tail_win": ((59 if r else 60, 1.0), (1, 3.0), (40, -1.0)),
        "both_tails": (
            (59 if r else 60, 1.0),
            (1, 3.0),
            (39 if r else 40, -1.0),
            (1, -3.0),
        ),
    }
