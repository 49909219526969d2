"""Seeded Monte Carlo of multiplicative wealth paths.

Each path compounds ``W_t = W_{t-1} * (1 + f * X_t)`` with i.i.d. outcomes
drawn from a DiscreteModel. Per-path random streams are derived from
``(master_seed, path_index)`` through the counter-based Philox generator,
so results are bit-identical for a given config no matter how paths are
scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleLeverage, ValidationError
from .model import DiscreteModel

DRAWDOWN_QUANTILES = (0.5, 0.9, 0.95, 0.99)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    seed: int
    n_paths: int
    n_periods: int
    leverage: float
    ruin_floor: float = 0.01

    def __post_init__(self):
        if self.n_paths < 1 or self.n_periods < 1:
            raise ValidationError("n_paths and n_periods must be >= 1")
        if not (0 < self.ruin_floor < 1):
            raise ValidationError("ruin_floor must be in (0, 1)")


@dataclass(frozen=True)
class PathStats:
    """Aggregate statistics over simulated wealth paths.

    ``mean_log_growth`` averages the per-path ``ln(W_N) / N``;
    ``se_log_growth`` is its standard error across paths. Terminal values
    are wealth multiples of the initial capital. ``ruin_fraction`` is the
    share of paths whose wealth ever touches the ruin floor.
    """

    n_paths: int
    n_periods: int
    mean_log_growth: float
    se_log_growth: float
    median_terminal: float
    mean_terminal: float
    max_drawdown_quantiles: dict[float, float]
    ruin_fraction: float


def _path_generator(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _step_logs(model: DiscreteModel, f: float) -> tuple[np.ndarray, np.ndarray]:
    v = model.values()
    factors = 1.0 + f * v
    if np.any(factors <= 0):
        raise InfeasibleLeverage(
            f"leverage {f} produces a non-positive wealth factor"
        )
    cum = np.cumsum(model.probabilities())
    return cum, np.log(factors)


def path_log_wealth(model: DiscreteModel, cfg: SimConfig, path_index: int) -> np.ndarray:
    """Cumulative log-wealth of one path, exactly as the engine computes it."""
    cum, step_logs = _step_logs(model, cfg.leverage)
    gen = _path_generator(cfg.seed, path_index)
    u = gen.random(cfg.n_periods)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(step_logs) - 1)
    return np.cumsum(step_logs[idx])


def _resolve_workers(requested: int | None) -> int:
    cap = int(os.environ.get("KELLY_TAILS_THREADS", "0") or 0)
    n = requested if requested and requested > 0 else (cap if cap > 0 else 1)
    if cap > 0:
        n = min(n, cap)
    return max(1, n)


def simulate_paths(
    model: DiscreteModel, cfg: SimConfig, n_workers: int | None = None
) -> PathStats:
    """Simulate ``cfg.n_paths`` wealth paths and aggregate their statistics.

    Paths are independent work units; with ``n_workers > 1`` they are
    spread over a thread pool, but each path's stream depends only on
    ``(cfg.seed, path_index)`` and every path writes its own output slot,
    so the result is identical for any worker count.
    """
    cum, step_logs = _step_logs(model, cfg.leverage)
    n = cfg.n_paths
    log_growth = np.empty(n)
    terminal = np.empty(n)
    max_dd = np.empty(n)
    ruined = np.empty(n, dtype=bool)
    log_floor = math.log(cfg.ruin_floor)
    k = len(step_logs)

    def run_block(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            gen = _path_generator(cfg.seed, i)
            u = gen.random(cfg.n_periods)
            idx = np.minimum(np.searchsorted(cum, u, side="right"), k - 1)
            cum_log = np.cumsum(step_logs[idx])
            log_growth[i] = cum_log[-1] / cfg.n_periods
            terminal[i] = math.exp(cum_log[-1])
            peak = np.maximum(np.maximum.accumulate(cum_log), 0.0)
            max_dd[i] = float(np.max(1.0 - np.exp(cum_log - peak)))
            ruined[i] = bool(np.min(cum_log) <= log_floor)

    workers = _resolve_workers(n_workers)
    if workers == 1:
        run_block(0, n)
    else:
        block = max(1, -(-n // workers))
        bounds = [(lo, min(lo + block, n)) for lo in range(0, n, block)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: run_block(*b), bounds))

    mean_lg = math.fsum(log_growth) / n
    if n > 1:
        se = float(np.std(log_growth, ddof=1)) / math.sqrt(n)
    else:
        se = 0.0
    qs = np.quantile(max_dd, DRAWDOWN_QUANTILES)
    return PathStats(
        n_paths=n,
        n_periods=cfg.n_periods,
        mean_log_growth=mean_lg,
        se_log_growth=se,
        median_terminal=float(np.median(terminal)),
        mean_terminal=math.fsum(terminal) / n,
        max_drawdown_quantiles=dict(zip(DRAWDOWN_QUANTILES, map(float, qs))),
        ruin_fraction=float(np.count_nonzero(ruined)) / n,
    )


def drawdown_distribution(
    model: DiscreteModel, cfg: SimConfig, n_workers: int | None = None
) -> dict[float, float]:
    """Quantiles of the per-path maximum peak-to-trough drawdown."""
    return simulate_paths(model, cfg, n_workers).max_drawdown_quantiles


@dataclass(frozen=True)
class CrossoverRow:
    n_periods: int
    mean_terminal: float
    median_terminal: float
    gap: float


def crossover_diagnostic(
    model: DiscreteModel,
    f: float,
    n_periods_grid,
    n_paths: int,
    seed: int,
    n_workers: int | None = None,
) -> list[CrossoverRow]:
    """Mean vs median terminal wealth across horizon lengths.

    The gap ``ln(mean) - ln(median)`` tracks how far the ensemble average
    (dominated by rare lucky paths) runs ahead of the typical path; for
    multiplicative processes it keeps widening with the horizon.
    """
    rows = []
    for n_periods in n_periods_grid:
        cfg = SimConfig(
            seed=seed, n_paths=n_paths, n_periods=int(n_periods), leverage=f
        )
        stats = simulate_paths(model, cfg, n_workers)
        rows.append(
            CrossoverRow(
                n_periods=int(n_periods),
                mean_terminal=stats.mean_terminal,
                median_terminal=stats.median_terminal,
                gap=math.log(stats.mean_terminal) - math.log(stats.median_terminal),
            )
        )
    return rows
