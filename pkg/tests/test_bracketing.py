import math

import numpy as np
import pytest

from tsvolterra.bracketing import (
    BracketPair,
    ModifiedKernelConfig,
    PenaltySign,
    SectorLookup,
    extremal_bracket_check,
    modified_kernel,
    monotone_iterate,
    penalized_solve,
    verify_lower,
    verify_upper,
)
from tsvolterra.calculus import GridFunction
from tsvolterra.dsl import parse
from tsvolterra.errors import GridMismatch, InvalidBracket, NodeNotOnGrid, NotMonotone, SectorEscape
from tsvolterra.solver import SolveConfig, picard_solve
from tsvolterra.timescale import TimeScale, discretize

ONE, X, ZERO = parse("1"), parse("x"), parse("0")


def const(ts, h, c):
    return GridFunction.constant(discretize(ts, h), c)


def sampled(ts, h, fn):
    return GridFunction.from_callable(discretize(ts, h), fn)


@pytest.fixture
def z5_pair(z5):
    return BracketPair(const(z5, 1, 0), sampled(z5, 1, lambda t: 2.0 ** (t + 1)))


# verification

def test_verify_lower_examples(z5):
    r = verify_lower(z5, ONE, X, const(z5, 1, 0), 1.0, 1e-9)
    assert r.ok and r.defect == -1
    exact = sampled(z5, 1, lambda t: 2.0**t)
    r = verify_lower(z5, ONE, X, exact, 1.0, 1e-9)
    assert r.ok and r.defect == 0
    r = verify_lower(z5, ONE, ZERO, const(z5, 1, 10), 1.0, 1e-9)
    assert not r.ok and r.defect == 9 and r.node == 0


def test_verify_upper_examples(z5):
    w = sampled(z5, 1, lambda t: 2.0 ** (t + 1))
    r = verify_upper(z5, ONE, X, w, 1.0, 1e-9)
    # 1 + sum_{s<t} 2^(s+1) = 2^(t+1) - 1, so the defect is -1 everywhere
    assert r.ok and r.defect == -1
    exact = sampled(z5, 1, lambda t: 2.0**t)
    assert verify_upper(z5, ONE, X, exact, 1.0, 1e-9).defect == 0
    assert not verify_upper(z5, ONE, ZERO, const(z5, 1, 0), 1.0, 1e-9)


def test_default_slack_on_interval(unit):
    # w = 1 + t + t^2/2 + t^3/4 is an upper solution of x = 1 + int x
    w = sampled(unit, 1e-2, lambda t: 1 + t + t**2 / 2 + t**3 / 4)
    assert verify_upper(unit, ONE, X, w, 1e-2)


def test_bracket_pair_rejects_empty_sector(z5):
    with pytest.raises(InvalidBracket):
        BracketPair(const(z5, 1, 1), const(z5, 1, 0))
    with pytest.raises(GridMismatch):
        BracketPair(const(z5, 1, 0), const(TimeScale.integers(0, 4), 1, 1))


# modified kernel

def test_modified_kernel_branches(unit):
    v, w = const(unit, 0.5, 0), const(unit, 0.5, 1)
    G = modified_kernel(ZERO, v, w)
    assert G(0.5, 0, 0.5) == 0
    assert G(0.5, 0, -1) == 0.5
    assert G(0.5, 0, 2) == -0.5
    Gv = modified_kernel(ZERO, v, w, ModifiedKernelConfig(PenaltySign.VERBATIM))
    assert Gv(0.5, 0, 2) == 0.5
    assert Gv(0.5, 0, -1) == 0.5


def test_modified_kernel_inside_equals_k(mixed):
    k = parse("sin(t*x) + s")
    v = sampled(mixed, 0.25, lambda t: -1 - t)
    w = sampled(mixed, 0.25, lambda t: 2 + t)
    G = modified_kernel(k, v, w)
    nodes = v.grid.nodes
    for t in nodes:
        for s in nodes[nodes <= t]:
            for p in np.linspace(v(t), w(t), 7):
                assert G(t, s, p) == pytest.approx(math.sin(t * p) + s, abs=1e-15)


def test_modified_kernel_outer_lookup_off_branches(z5):
    k = parse("x")
    v = sampled(z5, 1, lambda t: t)
    w = sampled(z5, 1, lambda t: t + 1)
    G = modified_kernel(k, v, w)
    # below the sector at t=4: k(t, s, v(s)) + z/(1+z^2) with z = v(4) - p
    assert G(4, 1, 3) == pytest.approx(1 + 1 / 2)
    # above: k(t, s, w(s)) + z/(1+z^2) with z = w(4) - p
    assert G(4, 1, 7) == pytest.approx(2 + (-2) / 5)


def test_modified_kernel_bounded(unit):
    rng = np.random.default_rng(3)
    k = parse("sin(x)*t")
    v, w = const(unit, 0.1, -1), const(unit, 0.1, 2)
    G = modified_kernel(k, v, w)
    nodes = v.grid.nodes
    ti = rng.integers(0, len(nodes), 2000)
    si = rng.integers(0, len(nodes), 2000)
    p = rng.normal(scale=50, size=2000)
    g = G(nodes[ti], nodes[si], p)
    assert np.max(np.abs(g)) <= 1.0 + 0.5


def test_modified_kernel_seams_continuous_constant_bracket(unit):
    k = parse("x^3 - t")
    v, w = const(unit, 0.25, -0.5), const(unit, 0.25, 0.75)
    G = modified_kernel(k, v, w)
    for t in v.grid.nodes:
        for seam in (-0.5, 0.75):
            eps = 1e-9
            assert G(t, t, seam - eps) == pytest.approx(G(t, t, seam), abs=1e-8)
            assert G(t, t, seam + eps) == pytest.approx(G(t, t, seam), abs=1e-8)


def test_modified_kernel_off_grid(unit):
    G = modified_kernel(X, const(unit, 0.5, 0), const(unit, 0.5, 1))
    with pytest.raises(NodeNotOnGrid):
        G(0.3, 0, 0)


# penalized solve

def test_penalized_solve_integer_example(z5, z5_pair):
    x, rep = penalized_solve(z5, ONE, X, z5_pair, SolveConfig(step_h=1.0))
    assert x.values.tolist() == [1, 2, 4, 8, 16, 32]
    assert rep.in_sector and rep.sector_excess <= 0
    assert rep.original_residual <= 1e-12


def test_penalized_solve_degenerate_sector(z5):
    exact = sampled(z5, 1, lambda t: 2.0**t)
    pair = BracketPair(exact, exact)
    inner = ModifiedKernelConfig(lookup=SectorLookup.INNER)
    x, _ = penalized_solve(z5, ONE, X, pair, SolveConfig(step_h=1.0), inner)
    np.testing.assert_array_equal(x.values, exact.values)
    # the outer lookup compares x(s) = 2^s with v(t) = 2^t and penalizes it
    with pytest.raises(SectorEscape):
        penalized_solve(z5, ONE, X, pair, SolveConfig(step_h=1.0))


def test_inner_lookup_seams_continuous(mixed):
    k = parse("x^3 - t")
    v = sampled(mixed, 0.25, lambda t: -1 + t / 3)
    w = sampled(mixed, 0.25, lambda t: 1 + t**2)
    G = modified_kernel(k, v, w, ModifiedKernelConfig(lookup=SectorLookup.INNER))
    nodes = v.grid.nodes
    for t in nodes:
        for s in nodes[nodes <= t]:
            for seam in (v(s), w(s)):
                assert G(t, s, seam - 1e-9) == pytest.approx(G(t, s, seam), abs=1e-7)
                assert G(t, s, seam + 1e-9) == pytest.approx(G(t, s, seam), abs=1e-7)


def test_penalized_solve_zero_kernel(mixed):
    f = parse("1 + t/4")
    pair = BracketPair(const(mixed, 0.25, 0), const(mixed, 0.25, 3))
    x, _ = penalized_solve(mixed, f, ZERO, pair, SolveConfig(step_h=0.25))
    np.testing.assert_array_equal(x.values, 1 + x.grid.nodes / 4)


def test_penalized_solve_escape(z5):
    pair = BracketPair(const(z5, 1, 0), const(z5, 1, 0.5))  # w is not an upper solution
    with pytest.raises(SectorEscape):
        penalized_solve(z5, ONE, ZERO, pair, SolveConfig(step_h=1.0))


# monotone iteration

def test_monotone_zero_kernel(mixed):
    f = parse("sin(t)")
    pair = BracketPair(const(mixed, 0.25, -2), const(mixed, 0.25, 2))
    rep = monotone_iterate(mixed, f, ZERO, pair, 1, 0.25)
    np.testing.assert_array_equal(rep.alpha.values, np.sin(rep.alpha.grid.nodes))
    np.testing.assert_array_equal(rep.beta.values, rep.alpha.values)
    assert rep.gap == 0
    assert rep.ordering_violations == []


def test_monotone_integer_scenario(z5, z5_pair):
    rep = monotone_iterate(z5, ONE, X, z5_pair, 6, 1.0)
    assert rep.ordering_violations == []
    assert rep.gap <= 1e-12
    assert rep.alpha.values.tolist() == [1, 2, 4, 8, 16, 32]
    assert len(rep.v_chain) == len(rep.w_chain) == 7
    assert all(b <= a + 1e-12 for a, b in zip(rep.gaps, rep.gaps[1:]))


def test_monotone_interval_scenario(unit):
    h = 1e-3
    pair = BracketPair(const(unit, h, 0), sampled(unit, h, lambda t: 4 + 4 * t))
    rep = monotone_iterate(unit, ONE, X, pair, 20, h)
    assert rep.ordering_violations == []
    assert rep.gap <= 1e-4
    assert abs(rep.alpha(1) - math.e) <= 1e-5


def test_monotone_rejects_invalid_brackets(z5):
    with pytest.raises(InvalidBracket):
        monotone_iterate(z5, ONE, ZERO, BracketPair(const(z5, 1, 10), const(z5, 1, 20)), 3, 1.0)
    with pytest.raises(InvalidBracket):
        monotone_iterate(z5, ONE, ZERO, BracketPair(const(z5, 1, 0), const(z5, 1, 0.5)), 3, 1.0)


def test_non_monotone_kernel_warns_or_fails(z5):
    pair = BracketPair(const(z5, 1, -100), const(z5, 1, 100))
    k = parse("-x/10")
    with pytest.warns(RuntimeWarning):
        rep = monotone_iterate(z5, ONE, k, pair, 3, 1.0)
    assert rep.monotone_warning
    with pytest.raises(NotMonotone):
        monotone_iterate(z5, ONE, k, pair, 3, 1.0, strict_monotone=True)


def test_violations_recorded_for_non_monotone_kernel():
    ts = TimeScale.integers(0, 3)
    pair = BracketPair(const(ts, 1, -1), const(ts, 1, 3))
    k = parse("-x")  # decreasing kernel: the upper chain overshoots
    with pytest.warns(RuntimeWarning):
        rep = monotone_iterate(ts, ONE, k, pair, 3, 1.0)
    assert rep.ordering_violations
    assert {o.relation[:1] for o in rep.ordering_violations} <= {"v", "w"}


def test_extremal_bracket_check(z5, z5_pair):
    rep = monotone_iterate(z5, ONE, X, z5_pair, 6, 1.0)
    x, _ = picard_solve(z5, ONE, X, const(z5, 1, 0), SolveConfig(step_h=1.0))
    assert extremal_bracket_check(x, rep)[0]
    assert extremal_bracket_check(rep.alpha, rep)[0]
    ok, worst = extremal_bracket_check(rep.alpha + 1, rep)
    assert not ok and worst == pytest.approx(1)
    with pytest.raises(GridMismatch):
        extremal_bracket_check(const(TimeScale.integers(0, 4), 1, 0), rep)


def test_chain_limits_bracket_picard_interval(unit):
    h = 1e-2
    pair = BracketPair(const(unit, h, 0), sampled(unit, h, lambda t: 4 + 4 * t))
    rep = monotone_iterate(unit, ONE, X, pair, 25, h)
    x, _ = picard_solve(unit, ONE, X, pair.v, SolveConfig(step_h=h, tol=1e-12))
    assert x.sup_distance(rep.alpha) <= 1e-11
    assert x.sup_distance(rep.beta) <= 1e-11
