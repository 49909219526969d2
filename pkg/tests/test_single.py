import math

import numpy as np
import pytest

from kelly_tails import (
    DomainViolation,
    GaussianCore,
    NoInteriorMaximum,
    TailSpec,
    ValidationError,
    arithmetic_growth,
    brown_scenarios,
    build_discrete_model,
    calibrate_center,
    etl_sweep,
    feasible_interval,
    growth_at,
    growth_sensitivity,
    kelly_binary,
    kelly_fat_closed,
    kelly_fat_exact,
    kelly_simple,
    scale_skew_convexity,
    scenario_growth,
    sigma_sensitivity,
    tail_impact,
)

FIG1_CORE = GaussianCore(mu=0.004, sigma=0.10)
FIG1_TAILS = TailSpec(alpha=0.02, etl=0.10)
FIG1_MODEL = build_discrete_model(FIG1_CORE, FIG1_TAILS)


# --- binary ------------------------------------------------------------------

def test_kelly_binary_even_bet():
    assert kelly_binary(0.6, 1.0) == pytest.approx(0.2, abs=1e-15)


def test_kelly_binary_zero_edge():
    assert kelly_binary(0.5, 1.0) == 0.0


def test_kelly_binary_against_grid_search():
    p, b = 0.55, 2.0
    grid = np.linspace(0.0, 0.5, 500_001)
    growth = p * np.log1p(b * grid) + (1 - p) * np.log1p(-grid)
    best = grid[np.argmax(growth)]
    assert kelly_binary(p, b) == pytest.approx(0.325, abs=1e-12)
    assert kelly_binary(p, b) == pytest.approx(best, abs=1e-6)


def test_kelly_binary_validation():
    with pytest.raises(ValidationError):
        kelly_binary(0.0, 1.0)
    with pytest.raises(ValidationError):
        kelly_binary(0.5, 0.0)


# --- simple (two-point) ------------------------------------------------------

def test_kelly_simple_fig1():
    point = kelly_simple(FIG1_CORE)
    assert point.fraction == pytest.approx(0.4, abs=1e-3)
    assert point.growth == pytest.approx(8.0e-4, abs=1e-6)
    # exact fraction mu/(sigma^2 - mu^2)
    assert point.fraction == pytest.approx(0.004 / (0.01 - 1.6e-5), rel=1e-14)


def test_kelly_simple_no_edge():
    point = kelly_simple(GaussianCore(mu=0.0, sigma=0.1))
    assert point.fraction == 0.0
    assert point.growth == 0.0


def test_kelly_simple_against_grid_search():
    model = build_discrete_model(FIG1_CORE)
    grid = np.linspace(-2.0, 5.0, 700_001)
    vals = [growth_at(model, f) for f in (grid[0], grid[-1])]  # feasibility probe
    growths = np.array(
        [sum(p * math.log1p(f * v) for v, p in model.outcomes) for f in grid]
    )
    best = grid[np.argmax(growths)]
    point = kelly_simple(FIG1_CORE)
    assert point.fraction == pytest.approx(best, abs=1e-5 * 10)
    # growth invariant: growth equals the growth function at the fraction
    assert point.growth == pytest.approx(growth_at(model, point.fraction), abs=1e-12)


# --- growth function ---------------------------------------------------------

def test_growth_at_zero_leverage():
    assert growth_at(FIG1_MODEL, 0.0) == 0.0


def test_growth_at_fig1_f019():
    # oracle: direct summation of the three weighted logs
    expected = (
        0.02 * math.log(1 - 0.19 * 0.10)
        + 0.49 * math.log(1 + 0.19 * (0.004 - 0.10))
        + 0.49 * math.log(1 + 0.19 * (0.004 + 0.10))
    )
    assert expected == pytest.approx(0.000184, abs=5e-7)
    assert growth_at(FIG1_MODEL, 0.19) == pytest.approx(expected, abs=1e-15)


def test_growth_at_domain_violation():
    with pytest.raises(DomainViolation):
        growth_at(FIG1_MODEL, 10.5)  # 1 - 10.5*0.10 < 0


@pytest.mark.filterwarnings("ignore::kelly_tails.ApproximationWarning")
def test_growth_concavity_midpoint_property():
    rng = np.random.default_rng(21)
    for _ in range(50):
        mu = rng.uniform(-0.01, 0.01)
        sigma = rng.uniform(abs(mu) + 1e-3, 0.2)
        model = build_discrete_model(
            GaussianCore(mu=mu, sigma=sigma),
            TailSpec(alpha=rng.uniform(0, 0.2), etl=rng.uniform(0.01, 0.3)),
        )
        lo, hi = feasible_interval(model)
        span = hi - lo
        f1, f2 = sorted(rng.uniform(lo + 0.01 * span, hi - 0.01 * span, size=2))
        mid = growth_at(model, 0.5 * (f1 + f2))
        assert mid >= 0.5 * (growth_at(model, f1) + growth_at(model, f2)) - 1e-12


# --- closed forms ------------------------------------------------------------

def test_kelly_fat_closed_fig1():
    point = kelly_fat_closed(FIG1_CORE, FIG1_TAILS)
    # independent evaluation of the two displayed formulas
    skew = 1 - 0.02 * 0.10 / (0.004 * 0.98)
    conv = 1 + 0.02 * 0.10**2 / (0.10**2 * 0.98)
    assert point.fraction == pytest.approx(0.4 * skew / conv, rel=1e-12)
    assert point.fraction == pytest.approx(0.192, abs=1e-3)
    assert point.growth == pytest.approx(
        0.5 * 0.98 * 0.004**2 * skew**2 / (0.01 * conv), rel=1e-12
    )
    assert point.growth == pytest.approx(0.000184, abs=1e-6)


def test_kelly_fat_closed_no_tail_reduction():
    point = kelly_fat_closed(FIG1_CORE, TailSpec())
    assert point.fraction == pytest.approx(0.004 / 0.01, rel=1e-14)
    assert point.growth == pytest.approx(0.5 * 0.004**2 / 0.01, rel=1e-14)


def test_kelly_fat_closed_negative_fraction_regime():
    with pytest.warns(UserWarning):
        core = GaussianCore(mu=0.06, sigma=0.2)
    point = kelly_fat_closed(core, TailSpec(alpha=0.2, etl=0.3))
    assert point.fraction < 0  # skew term 1 - 1.25 < 0: short the asset


def test_both_tails_formula_matches_one_sided_identity():
    # with beta = ETW = 0 the two-sided expression must equal the one-sided
    # formula exactly, not merely approximately
    rng = np.random.default_rng(5)
    for _ in range(100):
        mu = rng.uniform(1e-4, 0.01)
        sigma = rng.uniform(5.1 * mu, 0.3)
        alpha = rng.uniform(0.0, 0.3)
        etl = rng.uniform(0.0, 0.5)
        core = GaussianCore(mu=mu, sigma=sigma)
        point = kelly_fat_closed(core, TailSpec(alpha=alpha, etl=etl))
        one_sided_f = (
            mu / sigma**2
            * (1 - alpha * etl / (mu * (1 - alpha)))
            / (1 + alpha * etl**2 / (sigma**2 * (1 - alpha)))
        )
        one_sided_g = (
            mu**2 / (2 * sigma**2) * (1 - alpha)
            * (1 - alpha * etl / (mu * (1 - alpha))) ** 2
            / (1 + alpha * etl**2 / (sigma**2 * (1 - alpha)))
        )
        assert point.fraction == pytest.approx(one_sided_f, rel=1e-14, abs=1e-14)
        assert point.growth == pytest.approx(one_sided_g, rel=1e-14, abs=1e-14)


# --- exact optimizer ---------------------------------------------------------

def test_kelly_fat_exact_fig1_against_dense_grid():
    point = kelly_fat_exact(FIG1_MODEL)
    grid = np.arange(0.0, 1.0, 1e-5)
    p = FIG1_MODEL.probabilities()
    v = FIG1_MODEL.values()
    growths = np.log1p(np.outer(grid, v)) @ p
    best = grid[np.argmax(growths)]
    assert point.fraction == pytest.approx(best, abs=1e-5)
    assert point.fraction == pytest.approx(0.192, abs=2e-3)
    assert np.max(growths) <= point.growth + 1e-10


def test_kelly_fat_exact_matches_quadratic_root():
    # first-order condition sum_i p_i v_i prod_{j!=i}(1 + f v_j) = 0 is a
    # quadratic for the three-point model; the optimizer must sit on its
    # feasible root
    v = FIG1_MODEL.values()
    p = FIG1_MODEL.probabilities()
    c0 = np.dot(p, v)
    c1 = sum(p[i] * v[i] * sum(v[j] for j in range(3) if j != i) for i in range(3))
    c2 = sum(
        p[i] * v[i] * np.prod([v[j] for j in range(3) if j != i]) for i in range(3)
    )
    roots = np.roots([c2, c1, c0])
    lo, hi = feasible_interval(FIG1_MODEL)
    feasible = [r.real for r in roots if abs(r.imag) < 1e-12 and lo < r.real < hi]
    assert len(feasible) == 1
    assert kelly_fat_exact(FIG1_MODEL).fraction == pytest.approx(
        feasible[0], abs=1e-10
    )


def test_kelly_fat_exact_no_tail_matches_simple():
    model = build_discrete_model(FIG1_CORE)
    exact = kelly_fat_exact(model)
    simple = kelly_simple(FIG1_CORE)
    assert exact.fraction == pytest.approx(simple.fraction, abs=1e-9)
    assert exact.growth == pytest.approx(simple.growth, abs=1e-12)


def test_kelly_fat_exact_growth_invariant():
    point = kelly_fat_exact(FIG1_MODEL)
    assert point.growth == pytest.approx(
        growth_at(FIG1_MODEL, point.fraction), abs=1e-12
    )


def test_kelly_fat_exact_no_interior_maximum():
    from kelly_tails import DiscreteModel

    model = DiscreteModel(outcomes=((0.01, 0.5), (0.03, 0.5)))
    with pytest.raises(NoInteriorMaximum):
        kelly_fat_exact(model)


@pytest.mark.filterwarnings("ignore::kelly_tails.ApproximationWarning")
def test_oracle_optimality_random_models():
    rng = np.random.default_rng(99)
    for _ in range(10):
        mu = rng.uniform(-0.005, 0.01)
        sigma = rng.uniform(abs(mu) + 1e-3, 0.25)
        model = build_discrete_model(
            GaussianCore(mu=mu, sigma=sigma),
            TailSpec(alpha=rng.uniform(0, 0.2), etl=rng.uniform(0.01, 0.4),
                     beta=rng.uniform(0, 0.1), etw=rng.uniform(0.01, 0.4)),
        )
        point = kelly_fat_exact(model)
        lo, hi = feasible_interval(model)
        span = hi - lo
        grid = np.linspace(lo + 1e-6 * span, hi - 1e-6 * span, 100_000)
        growths = np.log1p(np.outer(grid, model.values())) @ model.probabilities()
        assert point.growth >= np.max(growths) - 1e-10


# --- shorting transition and sweeps ------------------------------------------

def test_fixed_center_sweep_sign_change_is_smooth():
    rows = etl_sweep(0.004, 0.10, 0.02, np.linspace(0.0, 0.25, 101),
                     mode="fixed-center")
    signs = np.sign([r.f_exact for r in rows])
    flips = np.nonzero(np.diff(signs) != 0)[0]
    assert len(flips) == 1
    i = flips[0]
    assert abs(rows[i].f_exact) < 0.05 and abs(rows[i + 1].f_exact) < 0.05
    # analytic crossing: model mean (1-a)mu - a*etl hits zero at etl = 0.196
    assert rows[i].etl < 0.196 < rows[i + 1].etl


def test_fixed_center_sweep_monotone_non_increasing():
    rows = etl_sweep(0.004, 0.10, 0.02, np.linspace(0.0, 0.25, 51),
                     mode="fixed-center")
    f = [r.f_exact for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(f, f[1:]))


def test_recalibrated_sweep_pins_moments_and_sign():
    # per-row recalibration pins the model mean at mu0, so the exact
    # fraction keeps the sign of mu0 and stays nearly flat
    mu0, sigma0 = 0.00192, 0.010011993600000001**0.5
    rows = etl_sweep(mu0, sigma0, 0.02, np.linspace(0.0, 0.4, 21))
    f = np.array([r.f_exact for r in rows])
    assert np.all(f > 0)
    assert np.ptp(f) < 0.05 * np.mean(f)


def test_recalibrated_sweep_row_matches_fig1_at_etl_010():
    mu0, sigma0 = 0.00192, 0.010011993600000001**0.5
    rows = etl_sweep(mu0, sigma0, 0.02, [0.10])
    assert rows[0].f_exact == pytest.approx(0.19198772, abs=1e-6)
    assert rows[0].g_exact == pytest.approx(0.000184227, abs=1e-8)


def test_sweep_single_point_no_tail_equals_simple():
    rows = etl_sweep(0.004, 0.10, alpha=0.0, etl_grid=[0.0])
    simple = kelly_simple(FIG1_CORE)
    assert rows[0].f_exact == pytest.approx(simple.fraction, abs=1e-9)
    assert rows[0].g_exact == pytest.approx(simple.growth, abs=1e-12)
    assert rows[0].f_closed == pytest.approx(0.004 / 0.01, rel=1e-12)


def test_sweep_exact_dominates_closed_form_on_same_model():
    rows = etl_sweep(0.00192, 0.1000599, 0.02, np.linspace(0.0, 0.3, 13))
    for row in rows:
        assert row.feasible
        core = calibrate_center(0.00192, 0.1000599, 0.02, row.etl)
        model = build_discrete_model(core, TailSpec(alpha=0.02, etl=row.etl))
        assert row.g_exact >= growth_at(model, row.f_closed) - 1e-12


def test_sweep_marks_infeasible_rows():
    rows = etl_sweep(0.0, 0.05, 0.5, [0.01, 0.5])  # second row: sigma^2 < 0
    assert rows[0].feasible
    assert not rows[1].feasible
    assert math.isnan(rows[1].f_exact)


def test_sweep_rejects_unknown_mode():
    with pytest.raises(ValidationError):
        etl_sweep(0.004, 0.1, 0.02, [0.1], mode="frozen")


# --- scalar diagnostics ------------------------------------------------------

def test_tail_impact_values():
    with pytest.warns(UserWarning):
        heavy = GaussianCore(mu=0.06, sigma=0.2)
    # 2*0.2*0.3 / (0.06*0.8): the footnote parameter set pushes it past 2,
    # where the closed-form fraction turns negative
    assert tail_impact(heavy, TailSpec(alpha=0.2, etl=0.3)) == pytest.approx(
        2.5, rel=1e-12
    )
    assert tail_impact(FIG1_CORE, TailSpec()) == 0.0
    assert tail_impact(FIG1_CORE, FIG1_TAILS) == pytest.approx(
        0.004 / 0.00392, rel=1e-12
    )


def test_tail_impact_requires_positive_mu():
    with pytest.raises(ValidationError):
        tail_impact(GaussianCore(mu=0.0, sigma=0.1), FIG1_TAILS)


def test_arithmetic_growth():
    out = arithmetic_growth(FIG1_CORE, TailSpec())
    assert out["rate"] == pytest.approx(0.004, abs=1e-15)
    assert out["log_drift_full_leverage"] == pytest.approx(-0.001, abs=1e-6)
    with pytest.warns(UserWarning):
        heavy = GaussianCore(mu=0.06, sigma=0.2)
    assert arithmetic_growth(heavy, TailSpec(alpha=0.2, etl=0.3))[
        "rate"
    ] == pytest.approx(-0.012, abs=1e-15)


# --- growth sensitivity ------------------------------------------------------

def test_growth_sensitivity_signs_fig1():
    sens = growth_sensitivity(FIG1_CORE)
    assert sens["dg_dsigma"] < 0  # growth falls as volatility rises
    assert sens["d2g_dsigma2"] > 0  # with positive curvature
    assert sens["z_g"] > 0


def test_growth_sensitivity_matches_analytic_derivatives():
    # g*(sigma) = -0.5*ln(1 - mu^2/sigma^2) differentiates in closed form
    mu, sigma = 0.004, 0.10
    sens = growth_sensitivity(GaussianCore(mu=mu, sigma=sigma))
    d1 = -(mu**2) / (sigma * (sigma**2 - mu**2))
    d2 = mu**2 * (3 * sigma**2 - mu**2) / (sigma * (sigma**2 - mu**2)) ** 2
    assert sens["dg_dsigma"] == pytest.approx(d1, rel=1e-6)
    assert sens["d2g_dsigma2"] == pytest.approx(d2, rel=1e-4)


def test_growth_sensitivity_richardson_consistency():
    full = growth_sensitivity(FIG1_CORE, rel_step=1e-4)
    half = growth_sensitivity(FIG1_CORE, rel_step=5e-5)
    for key in ("dg_dsigma", "d2g_dsigma2", "z_g"):
        assert full[key] == pytest.approx(half[key], rel=5e-4)


def test_scaling_factor_of_approximate_growth_is_7mu2_over_sigma3():
    # differentiate g(sigma) = mu^2/(2 sigma^2) numerically and compare with
    # the symbolic result -dg/ds + 2s d2g/ds2 = 7 mu^2 / sigma^3
    mu, sigma = 0.004, 0.10
    sens = sigma_sensitivity(lambda s: mu**2 / (2 * s**2), sigma)
    assert sens["z_g"] == pytest.approx(7 * mu**2 / sigma**3, rel=1e-3)


def test_z_g_positive_on_parameter_sweep():
    for mu in (0.001, 0.004, 0.01):
        for sigma in (0.06, 0.1, 0.2, 0.4):
            if mu < sigma / 5:
                sens = growth_sensitivity(GaussianCore(mu=mu, sigma=sigma))
                assert sens["z_g"] > 0


def test_scale_skew_convexity_mapping():
    assert scale_skew_convexity(2.0, -0.3, 0.5) == (-0.6, 1.0)


# --- scenario growth ---------------------------------------------------------

def test_scenario_base_case_749_percent():
    multiple, growth = scenario_growth(((60, 1.0), (40, -1.0)), 0.2)
    assert multiple == pytest.approx(1.2**60 * 0.8**40, rel=1e-14)
    assert multiple == pytest.approx(7.49, abs=0.01)
    assert growth == pytest.approx(math.log(multiple) / 100, rel=1e-12)


def test_scenario_no_bet():
    assert scenario_growth(((1, 1.0),), 0.0) == (1.0, 0.0)


def test_scenario_replacement_tail_variants_and_ordering():
    tallies = brown_scenarios()
    results = {
        name: scenario_growth(tally, 0.2)[0] for name, tally in tallies.items()
    }
    assert results["tail_loss"] == pytest.approx(3.74, abs=0.01)
    assert results["tail_win"] == pytest.approx(9.99, abs=0.01)
    assert results["both_tails"] == pytest.approx(4.99, abs=0.01)
    assert (
        results["tail_win"]
        > results["base"]
        > results["both_tails"]
        > results["tail_loss"]
    )


def test_scenario_append_convention_counts():
    tallies = brown_scenarios(convention="append")
    assert sum(c for c, _ in tallies["base"]) == 100
    assert sum(c for c, _ in tallies["tail_loss"]) == 101
    assert sum(c for c, _ in tallies["both_tails"]) == 102


def test_scenario_ruin_raises():
    with pytest.raises(DomainViolation):
        scenario_growth(((1, -1.0),), 1.0)


def test_brown_rejects_unknown_convention():
    with pytest.raises(ValidationError):
        brown_scenarios(convention="sideways")
