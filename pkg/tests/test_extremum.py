"""Static maps, feasibility analysis, rate bounds, and the even-map solver."""

import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings

from cycleseek import (AssumptionViolation, ConfigError, EsParams,
                       IntegratorConfig, PreconditionError, StaticMap,
                       analyze, averaging_probe, build_es_system,
                       certificate_rate_bound, curvature_floor,
                       interval_abs_max, named_map,
                       solve_even_map_fixed_point, verify_jacobian_bound)

from strategies import even_wellshaped_maps

TWO_PI = 2.0 * math.pi

QUAD = named_map("quadratic")    # 1 + x^2
QUART = named_map("quartic")     # x^2 + x^4


# ----------------------------------------------------------------- static maps


def test_coefficients_trimmed():
    m = StaticMap.from_coefficients([1.0, 2.0, 0.0, 0.0])
    assert m.coeffs == (1.0, 2.0)
    assert StaticMap.from_coefficients([0.0]).coeffs == (0.0,)
    with pytest.raises(ValueError):
        StaticMap.from_coefficients([])


def test_named_maps():
    assert QUAD.h(2.0) == 5.0
    assert QUART.h1(1.0) == 6.0
    with pytest.raises(ConfigError):
        named_map("cubic")


def test_derivative_consistency_guard():
    good = StaticMap.from_callables(lambda x: x * x, lambda x: 2 * x,
                                    lambda x: 2.0, lambda x: 0.0)
    good.check_derivative_consistency()
    bad = StaticMap.from_callables(lambda x: x * x, lambda x: 3 * x,
                                   lambda x: 2.0, lambda x: 0.0)
    with pytest.raises(AssumptionViolation):
        bad.check_derivative_consistency()


def test_wellshaped_guard():
    QUAD.check_wellshaped(2.0)
    hump = StaticMap.from_coefficients([0.0, 0.0, -1.0])
    with pytest.raises(AssumptionViolation):
        hump.check_wellshaped(1.0)


def test_even_guard():
    QUAD.check_even(2.0)
    tilted = StaticMap.from_coefficients([0.0, 1.0, 1.0])
    with pytest.raises(AssumptionViolation):
        tilted.check_even(1.0)


def test_interval_max_polynomial_exact():
    assert interval_abs_max(QUART, 0, 2.0) == 20.0
    assert interval_abs_max(QUART, 1, 2.0) == 36.0
    # interior critical point of 1 + x^2 on an asymmetric window
    assert interval_abs_max(QUAD, 0, (-1.0, 0.5)) == 2.0
    with pytest.raises(ValueError):
        interval_abs_max(QUAD, 0, (1.0, -1.0))


def test_interval_max_scan_agrees_with_exact():
    generic = StaticMap.from_callables(
        lambda x: x * x + x ** 4, lambda x: 2 * x + 4 * x ** 3,
        lambda x: 2 + 12 * x * x, lambda x: 24 * x)
    for order in (0, 1, 2, 3):
        exact = interval_abs_max(QUART, order, 2.0)
        scanned = interval_abs_max(generic, order, 2.0)
        assert scanned == pytest.approx(exact, rel=1e-6)


def test_curvature_floor_values():
    assert curvature_floor(QUAD, 1.0) == pytest.approx(2.0, rel=1e-12)
    # line average of 2 + 12 s^2 over [0, w] is 2 + 4 w^2, minimal at w = 0
    assert curvature_floor(QUART, 0.5) == pytest.approx(2.0, rel=1e-9)
    hump = StaticMap.from_coefficients([0.0, 0.0, -1.0])
    with pytest.raises(AssumptionViolation):
        curvature_floor(hump, 1.0)


# ------------------------------------------------------------------ parameters


@pytest.mark.parametrize("kwargs", [
    dict(epsilon=0.0, amp=0.1, radius=1.0),
    dict(epsilon=0.01, amp=-0.1, radius=1.0),
    dict(epsilon=0.01, amp=0.1, radius=0.0),
    dict(epsilon=0.01, amp=0.1, radius=1.0, box=-0.5),
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        EsParams(**kwargs)


def test_closed_loop_rhs():
    sys = build_es_system(QUAD, EsParams(0.01, 0.1, 1.0))
    t, x = 0.7, 0.2
    s = math.sin(t)
    expected = -0.01 * s * (1.0 + (x + 0.1 * s) ** 2)
    assert sys.rhs_scalar(t, x) == pytest.approx(expected, rel=1e-14)
    d = 1e-6
    fd = (sys.rhs_scalar(t, x + d) - sys.rhs_scalar(t, x - d)) / (2 * d)
    assert sys.jacobian_scalar(t, x) == pytest.approx(fd, abs=1e-8)


def test_closed_loop_rejects_bad_handles():
    bad = StaticMap.from_callables(lambda x: x * x, lambda x: 3 * x,
                                   lambda x: 2.0, lambda x: 0.0)
    with pytest.raises(AssumptionViolation):
        build_es_system(bad, EsParams(0.01, 0.1, 1.0))


# ------------------------------------------------------------------- analysis


def test_analysis_feasible_instance():
    res = analyze(QUAD, EsParams(5e-4, 1.0, 1.0))
    assert res.curvature_floor == pytest.approx(2.0, rel=1e-12)
    assert res.third_deriv_max == 0.0
    assert res.residual_gain == pytest.approx(1496.0, rel=1e-12)
    assert res.residual_within_radius.lhs == pytest.approx(0.68, rel=1e-12)
    assert res.asymptotic_radius == pytest.approx(0.748, rel=1e-12)
    assert res.quadratic_sup_bound == pytest.approx(0.748, rel=1e-12)
    for name in ("slope_gain_ok", "value_gain_ok", "residual_within_radius",
                 "amplitude_budget_ok", "amplitude_radius_ok", "invariance_ok",
                 "picard_contraction_ok", "amp_within_unit"):
        cond = getattr(res, name)
        assert cond.holds, name
        assert cond.margin >= 0.0


def test_analysis_small_gain_is_necessary():
    # with amp = 0.1 the residual gain blows up: the gain condition needs
    # eps below roughly 7e-5, so eps = 1e-3 fails it while the softer
    # slope and contraction conditions still hold
    res = analyze(QUAD, EsParams(1e-3, 0.1, 1.0))
    assert res.residual_gain == pytest.approx(13736.0, rel=1e-12)
    assert res.residual_within_radius.lhs == pytest.approx(13.6, rel=1e-12)
    assert not res.residual_within_radius.holds
    assert res.asymptotic_radius == pytest.approx(13.736, rel=1e-12)
    assert res.slope_gain_ok.holds
    assert res.picard_contraction_ok.holds


def test_analysis_box_and_gain_threshold():
    res = analyze(QUAD, EsParams(0.01, 0.1, 1.0, box=0.05))
    assert res.box_feasible is not None and res.box_feasible.holds
    assert res.box_feasible.lhs == pytest.approx(0.2, rel=1e-12)
    # the box margin dominates: eps* = box / residual_gain
    assert res.eps_star == pytest.approx(0.05 / 13736.0, rel=1e-9)


def test_analysis_without_box():
    res = analyze(QUAD, EsParams(0.01, 0.1, 1.0))
    assert res.box_feasible is None
    assert res.eps_star is None
    d = res.to_dict()
    assert d["conditions"]["box_feasible"] is None
    assert set(d["conditions"]) == {
        "box_feasible", "slope_gain_ok", "value_gain_ok",
        "residual_within_radius", "amplitude_budget_ok",
        "amplitude_radius_ok", "invariance_ok", "picard_contraction_ok",
        "amp_within_unit"}
    assert d["conditions"]["slope_gain_ok"]["margin"] == pytest.approx(
        1.0 - res.slope_gain_ok.lhs)


# ----------------------------------------------------------------- rate bound


def test_rate_bound_closed_form():
    rate = certificate_rate_bound(QUAD, EsParams(0.01, 0.1, 1.0, box=0.05))
    expected = -0.002 * math.pi + 0.004
    assert rate.rate_integral == pytest.approx(expected, rel=1e-12)
    assert rate.rate_integral < 0.0
    quad_int, _ = scipy.integrate.quad(rate.rate_fn, 0.0, TWO_PI, limit=200)
    assert quad_int == pytest.approx(rate.rate_integral, abs=1e-10)


def test_rate_bound_needs_box():
    with pytest.raises(PreconditionError):
        certificate_rate_bound(QUAD, EsParams(0.01, 0.1, 1.0))


def test_rate_bound_needs_curvature():
    hump = StaticMap.from_coefficients([0.0, 0.0, -1.0])
    with pytest.raises(AssumptionViolation):
        certificate_rate_bound(hump, EsParams(0.01, 0.1, 1.0, box=0.05))


@pytest.mark.parametrize("m,params", [
    (QUAD, EsParams(0.01, 0.1, 1.0, box=0.05)),
    (QUART, EsParams(0.001, 0.1, 0.5, box=0.05)),
    (QUAD, EsParams(0.2, 0.5, 1.0, box=0.3)),
])
def test_jacobian_bound_holds_on_grid(m, params):
    ok, rep = verify_jacobian_bound(m, params)
    assert ok
    assert rep.margin <= 1e-12


# ------------------------------------------------------------ averaging probe


def test_averaged_map_quadratic_closed_form():
    probe = averaging_probe(QUAD, EsParams(0.01, 0.1, 1.0))
    # sin t weighting of 1 + (w + a sin t)^2 averages to a w exactly
    for w in (-1.0, 0.0, 0.3):
        assert probe.averaged_fn(w) == pytest.approx(0.1 * w, abs=1e-10)
    assert probe.window == 3.0
    assert probe.ripple_sup_bound == 136.0


def test_ripple_vanishes_at_period_ends():
    probe = averaging_probe(QUAD, EsParams(0.01, 0.1, 1.0))
    assert probe.ripple_fn(0.0, 0.5) == 0.0
    assert probe.ripple_fn(TWO_PI, 0.5) == pytest.approx(0.0, abs=1e-9)
    ts = np.linspace(0.0, TWO_PI, 9)
    for t in ts:
        val = probe.ripple_fn(float(t), 0.5)
        assert abs(val) <= probe.ripple_sup_bound


def test_transform_increasing_in_state():
    probe = averaging_probe(QUAD, EsParams(0.01, 0.1, 1.0))
    ws = np.linspace(-2.0, 2.0, 9)
    vals = [probe.transform_fn(0.8, float(w)) for w in ws]
    assert np.all(np.diff(vals) > 0)


def test_probe_requires_small_amplitude():
    with pytest.raises(PreconditionError):
        averaging_probe(QUAD, EsParams(0.01, 1.5, 1.0))


# ------------------------------------------------------------ even-map solver


def test_even_solver_quadratic():
    sol = solve_even_map_fixed_point(QUAD, EsParams(0.01, 0.1, 1.0))
    sup = float(np.max(np.abs(sol.values)))
    assert sup == pytest.approx(0.010066990352623838, rel=1e-9)
    assert sup <= sol.sup_bound
    assert sol.sup_bound == pytest.approx(0.034714598822167216, rel=1e-12)
    assert sol.flow_residual <= 1e-9
    assert sol.n_iters <= 10
    assert 0.0 <= sol.discretization_error <= 1e-6
    # antisymmetric extension is exact by construction
    n_half = (len(sol.times) - 1) // 2
    assert float(np.max(np.abs(sol.values[n_half:] + sol.values[:n_half + 1]))) == 0.0
    assert sol.values[0] == -sol.values[n_half]


def test_even_solver_value_interpolation():
    sol = solve_even_map_fixed_point(QUAD, EsParams(0.01, 0.1, 1.0))
    v = sol.value_at(0.3)
    assert isinstance(v, float)
    assert sol.value_at(0.3 + TWO_PI) == pytest.approx(v, rel=1e-12)
    arr = sol.value_at(np.array([0.0, math.pi]))
    assert arr.shape == (2,)
    assert arr[0] == sol.values[0]


def test_even_solver_rejects_odd_part():
    tilted = StaticMap.from_coefficients([0.0, 1.0, 1.0])
    with pytest.raises(AssumptionViolation):
        solve_even_map_fixed_point(tilted, EsParams(0.01, 0.1, 1.0))


def test_even_solver_reports_margins_when_infeasible():
    with pytest.raises(PreconditionError) as exc:
        solve_even_map_fixed_point(QUAD, EsParams(10.0, 0.1, 1.0))
    assert "margin" in str(exc.value)


@settings(max_examples=20)
@given(even_wellshaped_maps())
def test_even_solver_invariants(m):
    params = EsParams(1e-3, 0.1, 0.5)
    sol = solve_even_map_fixed_point(m, params, grid_n=256)
    sup = float(np.max(np.abs(sol.values)))
    assert sup <= sol.sup_bound + 1e-12
    assert sol.flow_residual <= 1e-6
    n_half = (len(sol.times) - 1) // 2
    assert float(np.max(np.abs(sol.values[n_half:] + sol.values[:n_half + 1]))) == 0.0
