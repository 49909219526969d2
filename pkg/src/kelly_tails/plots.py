"""Figure rendering for the CLI report path.

Each function takes rows already computed by the library and writes a PNG
next to the delimited output. Matplotlib is imported lazily with the Agg
backend so headless runs and library-only users never touch a display.
"""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_sweep_figure(rows, path) -> None:
    """Leverage and growth vs tail loss size, closed form vs exact."""
    plt = _pyplot()
    ok = [r for r in rows if r.feasible]
    etl = [r.etl for r in ok]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(etl, [r.f_closed for r in ok], label="closed form", ls="--")
    ax1.plot(etl, [r.f_exact for r in ok], label="exact")
    ax1.axhline(0.0, color="grey", lw=0.6)
    ax1.set_xlabel("tail loss size")
    ax1.set_ylabel("optimal leverage")
    ax1.legend()
    ax2.plot(etl, [r.g_closed for r in ok], label="closed form", ls="--")
    ax2.plot(etl, [r.g_exact for r in ok], label="exact")
    ax2.axhline(0.0, color="grey", lw=0.6)
    ax2.set_xlabel("tail loss size")
    ax2.set_ylabel("growth rate")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_frontier_figure(curves, path) -> None:
    """Net return vs volatility for each generated frontier curve."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, points in curves.items():
        ok = [p for p in points if p.feasible]
        ax.plot(
            [p.volatility for p in ok],
            [p.net_return for p in ok],
            marker="o",
            ms=3,
            label=name.replace("_", " "),
        )
    ax.set_xlabel("volatility")
    ax.set_ylabel("net return per period")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_drawdown_figure(quantile_map, path) -> None:
    """Maximum-drawdown quantiles as a bar chart."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    qs = sorted(quantile_map)
    ax.bar([str(q) for q in qs], [quantile_map[q] for q in qs], width=0.6)
    ax.set_xlabel("quantile")
    ax.set_ylabel("max drawdown")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_crossover_figure(rows, path) -> None:
    """Mean/median terminal wealth and their log gap vs horizon."""
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    n = [r.n_periods for r in rows]
    ax1.plot(n, [r.mean_terminal for r in rows], label="mean", marker="o", ms=3)
    ax1.plot(n, [r.median_terminal for r in rows], label="median", marker="s", ms=3)
    ax1.set_xlabel("periods")
    ax1.set_ylabel("terminal wealth multiple")
    ax1.legend()
    ax2.plot(n, [r.gap for r in rows], marker="o", ms=3)
    ax2.set_xlabel("periods")
    ax2.set_ylabel("ln(mean) - ln(median)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
