"""Multi-asset growth-optimal allocation.

In the Gaussian (no-tail) regime the optimal leverage vector solves
``C f = M`` and the growth rate is the quadratic ``f'M - 0.5 f'Cf``; the
same vector, normalized to sum one, is the maximum-Sharpe tangency
portfolio, and for equal Sharpe ratios on a diagonal covariance it
collapses to inverse-volatility (risk parity) weights.

The two-asset fat-tail case maximizes the exact log-growth objective
``E[ln(1 + f1*X1 + f2*X2)]`` over a discrete joint pdf whose tail states
can be co-aligned, opposed, or independent across the assets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateNormalization,
    InvalidJointModel,
    NewtonStall,
    NoInteriorMaximum,
    ValidationError,
)
from .model import (
    AllocationResult,
    Alignment,
    GaussianCore,
    PortfolioSpec,
    TailSpec,
    solve_covariance,
)

GRAD_TOL = 1e-12


def kelly_allocation(spec: PortfolioSpec) -> AllocationResult:
    """Gaussian-regime Kelly fractions ``f = C^-1 M``.

    Solved by factorization, never through an explicit inverse. The growth
    rate is the quadratic ``f'M - 0.5 f'Cf`` (equal to ``0.5 f'M`` at the
    optimum); diagnostics carry each asset's premium and variance
    contributions.
    """
    m, c = spec.premiums, spec.covariance
    f = solve_covariance(c, m)
    cf = c @ f
    growth = float(f @ m - 0.5 * f @ cf)
    diags = tuple(
        {
            "asset": i,
            "fraction": float(f[i]),
            "premium_contribution": float(f[i] * m[i]),
            "variance_contribution": float(f[i] * cf[i]),
        }
        for i in range(spec.n_assets)
    )
    return AllocationResult(
        fractions=f,
        total_leverage=float(f.sum()),
        growth_rate=growth,
        diagnostics=diags,
    )


def two_asset_closed(mu1, sigma1, mu2, sigma2, rho) -> tuple[float, float, float]:
    """Closed-form two-asset Kelly leverages.

        Z1 = (mu1/sigma1^2 - rho*mu2/(sigma1*sigma2)) / (1 - rho^2)
        Z2 = (mu2/sigma2^2 - rho*mu1/(sigma1*sigma2)) / (1 - rho^2)
        Z  = (mu1/sigma1^2 + mu2/sigma2^2 - rho*(mu1+mu2)/(sigma1*sigma2))
             / (1 - rho^2)

    Returns (Z1, Z2, Z) where Z is evaluated from the total-leverage
    expression (identical to Z1 + Z2 up to rounding).
    """
    if not abs(rho) < 1:
        raise ValidationError(f"|rho| must be < 1, got {rho}")
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValidationError("volatilities must be > 0")
    cross = rho / (sigma1 * sigma2)
    denom = 1.0 - rho * rho
    z1 = (mu1 / sigma1**2 - cross * mu2) / denom
    z2 = (mu2 / sigma2**2 - cross * mu1) / denom
    z = (mu1 / sigma1**2 + mu2 / sigma2**2 - cross * (mu1 + mu2)) / denom
    return z1, z2, z


def max_sharpe_tangency(spec: PortfolioSpec) -> np.ndarray:
    """Fully-invested max-Sharpe weights ``C^-1 M / (1' C^-1 M)``.

    Proportional to the Kelly fractions: the tangency portfolio is the
    Kelly solution constrained to absolute leverage one.
    """
    f = solve_covariance(spec.covariance, spec.premiums)
    total = float(f.sum())
    scale = max(1.0, float(np.abs(f).sum()))
    if abs(total) < 1e-12 * scale:
        raise DegenerateNormalization(
            "Kelly fractions sum to ~0; tangency weights undefined"
        )
    return f / total


def risk_parity_weights(sigmas) -> np.ndarray:
    """Inverse-volatility weights, normalized to sum one."""
    s = np.atleast_1d(np.asarray(sigmas, dtype=float))
    if np.any(s <= 0):
        raise ValidationError("volatilities must be > 0")
    w = 1.0 / s
    return w / w.sum()


@dataclass(frozen=True)
class JointTwoAssetModel:
    """Two assets with correlated normal states and a joint tail state.

    The normal block is the four-point distribution over
    ``(mu1 +/- sigma1, mu2 +/- sigma2)`` with weights ``(1+rho)/4`` for
    same-sign pairs and ``(1-rho)/4`` for opposite-sign pairs -- the unique
    symmetric four-point construction matching both marginals and the
    correlation rho.

    alignment=COALIGNED: with probability ``joint_alpha`` both assets lose
    their tails at once, state ``(-ETL1, -ETL2)``.
    alignment=OPPOSED: the joint tail is ``(-ETL1, +ETW2)`` (asset 2 gains
    its tail-win size while asset 1 crashes).
    alignment=INDEPENDENT: each asset's own tails (from its TailSpec) occur
    independently of the other asset's state; ``joint_alpha`` is unused.
    alignment=NONE: no tail states.
    """

    asset1: tuple[GaussianCore, TailSpec]
    asset2: tuple[GaussianCore, TailSpec]
    rho: float
    alignment: Alignment = Alignment.NONE
    joint_alpha: float = 0.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ValidationError(f"|rho| must be < 1, got {self.rho}")
        if not (0 <= self.joint_alpha < 1):
            raise ValidationError(
                f"joint_alpha must be in [0, 1), got {self.joint_alpha}"
            )


@dataclass(frozen=True)
class JointDistribution:
    """Discrete joint pdf over per-period outcome pairs."""

    x1: np.ndarray
    x2: np.ndarray
    p: np.ndarray

    def __len__(self):
        return len(self.p)


def _normal_block(core1, core2, rho, mass):
    states = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            w = (1.0 + rho) / 4.0 if s1 == s2 else (1.0 - rho) / 4.0
            states.append(
                (core1.mu + s1 * core1.sigma, core2.mu + s2 * core2.sigma, mass * w)
            )
    return states


def build_joint_model(m: JointTwoAssetModel) -> JointDistribution:
    """Assemble the discrete joint pdf for the given alignment mode."""
    core1, tails1 = m.asset1
    core2, tails2 = m.asset2
    states: list[tuple[float, float, float]] = []
    if m.alignment is Alignment.COALIGNED:
        if m.joint_alpha > 0:
            states.append((-tails1.etl, -tails2.etl, m.joint_alpha))
        states += _normal_block(core1, core2, m.rho, 1.0 - m.joint_alpha)
    elif m.alignment is Alignment.OPPOSED:
        if m.joint_alpha > 0:
            states.append((-tails1.etl, tails2.etw, m.joint_alpha))
        states += _normal_block(core1, core2, m.rho, 1.0 - m.joint_alpha)
    elif m.alignment is Alignment.INDEPENDENT:
        # Each asset: tail loss / tail win / a two-point normal half. Tails
        # hit independently; only the normal-normal block carries rho.
        t1 = [(-tails1.etl, tails1.alpha), (tails1.etw, tails1.beta)]
        t2 = [(-tails2.etl, tails2.alpha), (tails2.etw, tails2.beta)]
        n1 = 1.0 - tails1.alpha - tails1.beta
        n2 = 1.0 - tails2.alpha - tails2.beta
        for v1, p1 in t1:
            for v2, p2 in t2:
                if p1 * p2 > 0:
                    states.append((v1, v2, p1 * p2))
            for s2 in (1.0, -1.0):
                if p1 * n2 > 0:
                    states.append((v1, core2.mu + s2 * core2.sigma, p1 * n2 / 2.0))
        for v2, p2 in t2:
            for s1 in (1.0, -1.0):
                if n1 * p2 > 0:
                    states.append((core1.mu + s1 * core1.sigma, v2, n1 * p2 / 2.0))
        states += _normal_block(core1, core2, m.rho, n1 * n2)
    elif m.alignment is Alignment.NONE:
        states += _normal_block(core1, core2, m.rho, 1.0)
    else:
        raise ValidationError(f"unknown alignment {m.alignment}")

    p = np.array([s[2] for s in states])
    if np.any(p < 0):
        raise InvalidJointModel("negative probability in joint construction")
    keep = p > 0
    dist = JointDistribution(
        x1=np.array([s[0] for s in states])[keep],
        x2=np.array([s[1] for s in states])[keep],
        p=p[keep],
    )
    if abs(dist.p.sum() - 1.0) > 1e-12:
        raise InvalidJointModel(f"joint probabilities sum to {dist.p.sum()}")
    return dist


def _joint_growth(dist, f):
    args = 1.0 + dist.x1 * f[0] + dist.x2 * f[1]
    if np.min(args) <= 0:
        return -np.inf
    return float(np.dot(dist.p, np.log(args)))


def _joint_grad_hess(dist, f):
    x = np.column_stack([dist.x1, dist.x2])
    a = 1.0 + x @ f
    w = dist.p / a
    grad = w @ x
    hess = -(x.T * (dist.p / a**2)) @ x
    return grad, hess


def _coordinate_bisection(dist, f, iters=200):
    # Alternating exact 1D solves on the partial derivatives; slow but
    # dependable fallback when a Newton step misbehaves.
    f = f.copy()
    xs = (dist.x1, dist.x2)
    for _ in range(iters):
        moved = 0.0
        for k in (0, 1):
            other = 1.0 + xs[1 - k] * f[1 - k]
            xk = xs[k]

            def dk(t):
                return float(np.dot(dist.p, xk / (other + xk * t)))

            pos = other[xk > 0]
            neg = other[xk < 0]
            lo = np.max(-pos / xs[k][xs[k] > 0]) if len(pos) else -1e12
            hi = np.min(neg / -xs[k][xs[k] < 0]) if len(neg) else 1e12
            width = hi - lo
            a, b = lo + 1e-9 * width, hi - 1e-9 * width
            if dk(a) < 0 or dk(b) > 0:
                t = a if dk(a) < 0 else b
            else:
                for _ in range(120):
                    t = 0.5 * (a + b)
                    if dk(t) > 0:
                        a = t
                    else:
                        b = t
                t = 0.5 * (a + b)
            moved = max(moved, abs(t - f[k]))
            f[k] = t
        if moved < 1e-14:
            break
    return f


def joint_fat_allocation(m: JointTwoAssetModel, grad_tol: float = GRAD_TOL) -> AllocationResult:
    """Exact two-asset log-growth maximizer over the joint pdf.

    Damped Newton ascent on the strictly concave objective
    ``E[ln(1 + f1*X1 + f2*X2)]`` with backtracking that keeps every log
    argument positive; falls back to coordinate-wise bisection if a Newton
    iteration stalls. The returned growth rate is the objective at the
    optimum and the gradient norm there is below ``grad_tol``.
    """
    return maximize_joint_growth(build_joint_model(m), grad_tol)


def maximize_joint_growth(dist: JointDistribution, grad_tol: float = GRAD_TOL) -> AllocationResult:
    """Optimizer behind :func:`joint_fat_allocation`, usable on any joint pdf."""
    both_signs_1 = np.any(dist.x1 > 0) and np.any(dist.x1 < 0)
    both_signs_2 = np.any(dist.x2 > 0) and np.any(dist.x2 < 0)
    if not (both_signs_1 and both_signs_2):
        raise NoInteriorMaximum(
            "an asset's outcomes all share one sign; growth is unbounded "
            "or monotone in its fraction"
        )
    f = np.zeros(2)
    for _ in range(100):
        grad, hess = _joint_grad_hess(dist, f)
        if np.linalg.norm(grad) < grad_tol:
            break
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = grad
        t = 1.0
        base = _joint_growth(dist, f)
        while t > 1e-14 and _joint_growth(dist, f + t * step) < base:
            t *= 0.5
        if t <= 1e-14:
            f = _coordinate_bisection(dist, f)
            break
        f = f + t * step
    grad, _ = _joint_grad_hess(dist, f)
    if np.linalg.norm(grad) > max(grad_tol, 1e-10):
        f = _coordinate_bisection(dist, f)
        grad, _ = _joint_grad_hess(dist, f)
        if np.linalg.norm(grad) > max(grad_tol, 1e-10):
            raise NewtonStall(
                f"gradient norm {np.linalg.norm(grad)} after fallback"
            )
    growth = _joint_growth(dist, f)
    diags = tuple(
        {"asset": i, "fraction": float(f[i])} for i in range(2)
    )
    return AllocationResult(
        fractions=f,
        total_leverage=float(f.sum()),
        growth_rate=growth,
        diagnostics=diags,
    )
