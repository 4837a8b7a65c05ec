import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_sum, product_exp
from tsvolterra.calculus import (
    GridFunction,
    check_regressive,
    cumulative_weights,
    delta_derivative,
    delta_integral,
    delta_vs_riemann_gap,
    exp_fn,
    riemann_integral,
)
from tsvolterra.errors import (
    AtRightEndpoint,
    NodeNotOnGrid,
    NotNondecreasing,
    NotPositivelyRegressive,
    NotRegressive,
    ReversedBounds,
)
from tsvolterra.timescale import Interval, Point, TimeScale, discretize


def gf(ts, h, fn):
    return GridFunction.from_callable(discretize(ts, h), fn)


# delta_integral

def test_integral_integers_constant():
    g = gf(TimeScale.integers(0, 5), 1.0, lambda t: np.ones_like(t))
    assert delta_integral(g, 0, 5) == 5


def test_integral_linear_on_interval(unit):
    g = gf(unit, 1e-3, lambda t: t)
    assert delta_integral(g, 0, 1) == pytest.approx(0.5, abs=1e-9)


def test_integral_mixed(mixed):
    g = gf(mixed, 0.1, lambda t: np.ones_like(t))
    assert delta_integral(g, 0, 2) == pytest.approx(2.0, abs=1e-14)


def test_integral_errors(mixed):
    g = gf(mixed, 0.5, lambda t: t)
    with pytest.raises(ReversedBounds):
        delta_integral(g, 1, 0)
    with pytest.raises(NodeNotOnGrid):
        delta_integral(g, 0, 0.7)
    assert delta_integral(g, 1, 1) == 0


def test_integer_scale_is_literal_sum():
    pts = list(range(-3, 9))
    ts = TimeScale.points(pts)
    fn = lambda t: t**2 - 3 * t + 0.25  # noqa: E731
    g = gf(ts, 1.0, lambda t: fn(t))
    assert delta_integral(g, -3, 8) == finite_sum(fn, pts)


def test_fundamental_theorem_discrete():
    pts = [0, 0.5, 2, 2.25, 4, 7]
    ts = TimeScale.points(pts)
    g = gf(ts, 1.0, lambda t: np.sin(t) + t**2)
    deriv = GridFunction(g.grid, [delta_derivative(g, t) for t in pts[:-1]] + [0.0])
    for t in pts:
        assert delta_integral(deriv, 0, t) == pytest.approx(g(t) - g(0), abs=1e-12)


def test_additivity_and_linearity():
    ts = TimeScale.parse("[0,1];{1.5,2};[3,3.7];{5}")
    grid = discretize(ts, 0.05)
    rng = np.random.default_rng(7)
    g1 = GridFunction(grid, rng.normal(size=len(grid)))
    g2 = GridFunction(grid, rng.normal(size=len(grid)))
    nodes = grid.nodes
    for _ in range(50):
        i, j, k = sorted(rng.integers(0, len(nodes), size=3))
        lo, mid, hi = nodes[i], nodes[j], nodes[k]
        total = delta_integral(g1, lo, hi)
        assert delta_integral(g1, lo, mid) + delta_integral(g1, mid, hi) == pytest.approx(total, abs=1e-12)
    a, b = 2.5, -1.25
    lhs = delta_integral(a * g1 + b * g2, ts.a, ts.b)
    rhs = a * delta_integral(g1, ts.a, ts.b) + b * delta_integral(g2, ts.a, ts.b)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-13)


def test_cumulative_weights_match_delta_integral():
    ts = TimeScale.parse("{-1};[0,1];{1.5,2};[3,3.5]")
    grid = discretize(ts, 0.1)
    g = GridFunction(grid, np.cos(3 * grid.nodes))
    rows, cols, w = cumulative_weights(grid)
    fast = np.bincount(rows, weights=w * g.values[cols], minlength=len(grid))
    slow = [delta_integral(g, ts.a, t) for t in grid.nodes]
    np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-13)


# delta_derivative

def test_derivative_examples(mixed, unit):
    z = TimeScale.integers(0, 10)
    assert delta_derivative(gf(z, 1.0, lambda t: t**2), 3) == 7
    assert delta_derivative(gf(unit, 0.1, lambda t: np.full_like(t, 4.2)), 0.5) == 0
    assert delta_derivative(gf(mixed, 0.5, lambda t: t), 1) == 1


def test_derivative_errors(mixed):
    g = gf(mixed, 0.5, lambda t: t)
    with pytest.raises(AtRightEndpoint):
        delta_derivative(g, 2)
    with pytest.raises(NodeNotOnGrid):
        delta_derivative(g, 1.7)


def test_derivative_first_order_on_interval(unit):
    g = gf(unit, 1e-3, np.exp)
    assert delta_derivative(g, 0.5) == pytest.approx(math.exp(0.5), rel=1e-3)


# regressivity

def test_check_regressive_examples(unit):
    z = TimeScale.integers(0, 6)
    r = check_regressive(gf(z, 1.0, lambda t: np.full_like(t, -1.0)))
    assert not r.regressive and not r.positively_regressive
    assert r.worst_value == 0
    r = check_regressive(gf(unit, 0.1, lambda t: 100 * np.sin(t)))
    assert r.regressive and r.positively_regressive
    r = check_regressive(gf(z, 1.0, lambda t: np.full_like(t, -2.0)))
    assert r.regressive and not r.positively_regressive
    assert r.worst_value == -1


def test_check_regressive_worst_node():
    z = TimeScale.integers(0, 4)
    r = check_regressive(GridFunction(discretize(z, 1), [0, 0, -1, 0, 0]))
    assert r.worst_node == 2


# exponential

def test_exp_product_oracle():
    pts = [0, 1, 2, 3]
    g = gf(TimeScale.points(pts), 1.0, lambda t: np.ones_like(t))
    assert exp_fn(g, 3, 0) == pytest.approx(product_exp(lambda s: 1.0, pts), rel=1e-14)
    assert product_exp(lambda s: 1.0, pts) == 8


def test_exp_identity(mixed):
    g = gf(mixed, 0.25, lambda t: 3 * t - 1)
    for t in g.grid.nodes:
        assert exp_fn(g, t, t) == 1


def test_exp_interval(unit):
    g = gf(unit, 1e-3, lambda t: np.ones_like(t))
    assert exp_fn(g, 1, 0) == pytest.approx(math.e, abs=1e-6)


def test_exp_irregular_points_oracle():
    pts = [0, 0.3, 0.35, 1.2, 2.0, 2.7]
    p = lambda s: 0.4 - 0.2 * s  # noqa: E731
    g = gf(TimeScale.points(pts), 1.0, p)
    assert exp_fn(g, 2.7, 0) == pytest.approx(product_exp(p, pts), rel=1e-13)


def test_exp_errors():
    z = TimeScale.integers(0, 4)
    with pytest.raises(NotRegressive):
        exp_fn(gf(z, 1, lambda t: np.full_like(t, -1.0)), 3, 0)
    with pytest.raises(NotPositivelyRegressive):
        exp_fn(gf(z, 1, lambda t: np.full_like(t, -2.0)), 3, 0)
    with pytest.raises(ReversedBounds):
        exp_fn(gf(z, 1, lambda t: t), 0, 3)


@st.composite
def exp_cases(draw):
    comps = []
    pos = 0.0
    for _ in range(draw(st.integers(1, 4))):
        if draw(st.booleans()):
            w = draw(st.floats(0.2, 1.5))
            comps.append(Interval(pos, pos + w))
            pos += w
        else:
            comps.append(Point(pos))
        pos += draw(st.floats(0.1, 1.5))
    ts = TimeScale(comps)
    grid = discretize(ts, 0.1)
    c0 = draw(st.floats(-0.5, 2))
    c1 = draw(st.floats(-0.3, 0.3))
    p = GridFunction(grid, c0 + c1 * np.sin(grid.nodes))
    idx = sorted(draw(st.lists(st.integers(0, len(grid) - 1), min_size=3, max_size=3)))
    return p, [grid.nodes[i] for i in idx]


@settings(max_examples=100, deadline=None)
@given(exp_cases())
def test_exp_semigroup(case):
    p, (s, r, t) = case
    assert check_regressive(p).positively_regressive
    assert exp_fn(p, t, r) * exp_fn(p, r, s) == pytest.approx(exp_fn(p, t, s), rel=1e-10)


# Riemann comparison for nondecreasing functions

def test_gap_examples(unit):
    assert delta_vs_riemann_gap(gf(unit, 0.01, lambda t: t**3), 0, 1) == 0
    pts = TimeScale.points([0, 1, 2])
    h = gf(pts, 1, lambda t: t)
    assert riemann_integral(h, 0, 2) == 2
    assert delta_integral(h, 0, 2) == 1
    assert delta_vs_riemann_gap(h, 0, 2) == 1
    c = gf(pts, 1, lambda t: np.full_like(t, 3.5))
    assert delta_vs_riemann_gap(c, 0, 2) == 0


def test_gap_rejects_decreasing():
    h = gf(TimeScale.points([0, 1, 2]), 1, lambda t: -t)
    with pytest.raises(NotNondecreasing):
        delta_vs_riemann_gap(h, 0, 2)


def test_gridfunction_validation(unit):
    grid = discretize(unit, 0.5)
    with pytest.raises(ValueError):
        GridFunction(grid, [1, 2])
    with pytest.raises(ValueError):
        GridFunction(grid, [1, np.nan, 2])
