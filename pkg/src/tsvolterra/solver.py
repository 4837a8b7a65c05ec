"""Successive approximations for ``x(t) = f(t) + int_a^t k(t, s, x(s)) Δs``.

Starting from a seed ``v`` the iteration is

    x_0 = f + int k(., s, v(s)) Δs,      x_n = f + int k(., s, x_{n-1}(s)) Δs,

and for a kernel that is ``L``-Lipschitz in ``x`` the successive differences
obey the a-priori estimate ``|x_n - x_{n-1}| <= M (L (b - a))^n / n!`` with
``M = sup |x_0 - v|``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .calculus import GridFunction, cumulative_weights
from .dsl import EXPR_TYPES, Expr, evaluate_array
from .errors import EvaluationOverflow, GridMismatch, NonFiniteIterate
from .timescale import Grid, TimeScale, discretize

KernelFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def as_kernel(k: Union[Expr, KernelFn]) -> KernelFn:
    """Wrap an expression as a vectorized ``k(t, s, x)`` callable."""
    if isinstance(k, EXPR_TYPES):
        return lambda t, s, x: evaluate_array(k, t, s, x)
    if callable(k):
        return k
    raise TypeError(f"kernel must be an expression or a callable, got {k!r}")


def sample_forcing(f, grid: Grid) -> np.ndarray:
    """Values of ``f(t)`` at the grid nodes (expression, GridFunction or callable)."""
    if isinstance(f, GridFunction):
        if not f.grid.same_as(grid):
            raise GridMismatch("forcing term lives on a different grid")
        return f.values
    if isinstance(f, EXPR_TYPES):
        vals = evaluate_array(f, t=grid.nodes)
    else:
        vals = f(grid.nodes)
    return np.broadcast_to(np.asarray(vals, dtype=float), grid.nodes.shape).copy()


class IntegralOperator:
    """The map ``x -> f + int_a^t k(t, s, x(s)) Δs`` on a fixed grid.

    The kernel is evaluated only on node pairs ``s <= t`` and each row is
    reduced with ``np.bincount``, which sums in a fixed order, so results are
    reproducible bit for bit.
    """

    def __init__(self, grid: Grid, f, k):
        self.grid = grid
        self.kernel = as_kernel(k)
        self.fvals = sample_forcing(f, grid)
        self._rows, self._cols, self._w = cumulative_weights(grid)
        self._t = grid.nodes[self._rows]
        self._s = grid.nodes[self._cols]

    def integrals(self, xvals: np.ndarray) -> np.ndarray:
        kv = np.broadcast_to(self.kernel(self._t, self._s, xvals[self._cols]), self._t.shape)
        return np.bincount(self._rows, weights=self._w * kv, minlength=len(self.grid.nodes))

    def __call__(self, xvals: np.ndarray) -> np.ndarray:
        return self.fvals + self.integrals(np.asarray(xvals, dtype=float))


class StopReason(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    BOUND_TAIL = "BoundTail"


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_iter: int = 200
    step_h: float = 1e-3
    lipschitz_L: float | None = None  # None disables the a-priori bound

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be an integer >= 1")
        if not self.step_h > 0:
            raise ValueError("step_h must be positive")
        if self.lipschitz_L is not None and not self.lipschitz_L >= 0:
            raise ValueError("lipschitz_L must be nonnegative")


@dataclass
class SolveReport:
    iterations: int
    deltas: list[float]
    apriori_bounds: list[float]
    residual: float
    stop_reason: StopReason
    M: float
    lipschitz_L: float | None
    span: float = field(default=0.0)


def apriori_bound(M: float, L: float, span: float, k: int) -> float:
    """``M (L span)^k / k!``, computed as a running product so it cannot overflow."""
    if k < 1:
        raise ValueError("k must be >= 1")
    c = L * span
    term = float(M)
    for i in range(1, k + 1):
        term *= c / i
    return term


def apriori_tail(M: float, L: float, span: float, n: int) -> float:
    """``M * sum_{j > n} (L span)^j / j!``: bound on ``sup |x - x_n|``."""
    c = L * span
    if M == 0 or c == 0:
        return 0.0
    term = apriori_bound(M, L, span, n + 1)
    total = 0.0
    j = n + 1
    while term > 0:
        total += term
        j += 1
        term *= c / j
        if j > c and term <= total * 1e-17:
            break
    return total


def _check_grid(ts: TimeScale, grid: Grid, step_h: float):
    if grid.ts != ts or not grid.same_as(discretize(ts, step_h)):
        raise GridMismatch("seed is not sampled on discretize(ts, step_h)")


def _check_finite(vals: np.ndarray, iteration: int, grid: Grid):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise NonFiniteIterate(iteration, float(grid.nodes[int(np.argmax(bad))]))


def picard_solve(ts: TimeScale, f, k, seed: GridFunction, cfg: SolveConfig) -> tuple[GridFunction, SolveReport]:
    """Run successive approximations from ``seed``.

    Stops when the sup-norm step falls below ``cfg.tol`` (Converged), when
    the a-priori tail bound certifies ``cfg.tol`` accuracy (BoundTail, only
    with ``cfg.lipschitz_L`` set), or after ``cfg.max_iter`` steps (MaxIter).
    Returns the last iterate and a :class:`SolveReport`.
    """
    grid = seed.grid
    _check_grid(ts, grid, cfg.step_h)
    op = IntegralOperator(grid, f, k)
    return _iterate(op, seed.values, cfg, ts.b - ts.a)


def _apply(op: IntegralOperator, vals: np.ndarray, iteration: int) -> np.ndarray:
    try:
        out = op(vals)
    except EvaluationOverflow as exc:
        # the kernel overflowed on the previous iterate: report where it is largest
        node = float(op.grid.nodes[int(np.argmax(np.abs(vals)))])
        raise NonFiniteIterate(iteration, node) from exc
    _check_finite(out, iteration, op.grid)
    return out


def _iterate(op: IntegralOperator, seed_vals: np.ndarray, cfg: SolveConfig, span: float):
    grid = op.grid
    L = cfg.lipschitz_L
    prev = _apply(op, seed_vals, 0)
    M = float(np.max(np.abs(prev - seed_vals)))
    deltas: list[float] = []
    bounds: list[float] = []
    reason = StopReason.MAX_ITER
    for n in range(1, cfg.max_iter + 1):
        cur = _apply(op, prev, n)
        delta = float(np.max(np.abs(cur - prev)))
        deltas.append(delta)
        if L is not None:
            bounds.append(apriori_bound(M, L, span, n))
        prev = cur
        if delta <= cfg.tol:
            reason = StopReason.CONVERGED
            break
        if L is not None and apriori_tail(M, L, span, n) <= cfg.tol:
            reason = StopReason.BOUND_TAIL
            break
    res = float(np.max(np.abs(prev - op(prev))))
    report = SolveReport(
        iterations=len(deltas),
        deltas=deltas,
        apriori_bounds=bounds,
        residual=res,
        stop_reason=reason,
        M=M,
        lipschitz_L=L,
        span=span,
    )
    return GridFunction(grid, prev), report


def residual(ts: TimeScale, f, k, x: GridFunction, step_h: float) -> float:
    """``max_t |x(t) - f(t) - int_a^t k(t, s, x(s)) Δs|`` over the grid nodes."""
    _check_grid(ts, x.grid, step_h)
    op = IntegralOperator(x.grid, f, k)
    return float(np.max(np.abs(x.values - op(x.values))))


def uniqueness_crosscheck(ts: TimeScale, f, k, seed_a: GridFunction, seed_b: GridFunction, cfg: SolveConfig) -> float:
    """Solve from two seeds and return the sup distance of the limits.

    For a Lipschitz kernel the solution is unique, so the distance should be
    of the order of ``cfg.tol``.
    """
    if not seed_a.grid.same_as(seed_b.grid):
        raise GridMismatch("seeds live on different grids")
    xa, _ = picard_solve(ts, f, k, seed_a, cfg)
    xb, _ = picard_solve(ts, f, k, seed_b, cfg)
    return xa.sup_distance(xb)
