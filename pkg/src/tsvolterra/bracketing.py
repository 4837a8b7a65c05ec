"""Upper and lower solutions, the modified kernel, and monotone iteration.

A lower solution ``v`` satisfies ``v <= f + int k(., s, v(s)) Δs`` and an
upper solution ``w`` the reverse inequality.  For a kernel nondecreasing in
``x`` the two sequences

    v_n = f + int k(., s, v_{n-1}(s)) Δs,    w_n = f + int k(., s, w_{n-1}(s)) Δs

started at ``v_0 = v`` and ``w_0 = w`` satisfy
``v_0 <= v_1 <= ... <= v_n <= w_n <= ... <= w_1 <= w_0`` and their limits
bracket every solution lying in the sector ``[v, w]``.  Here ``alpha`` is the
limit of the lower chain and ``beta`` the limit of the upper chain, so
``alpha <= x <= beta``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .calculus import GridFunction, quadrature_tol
from .dsl import EXPR_TYPES, check_monotone_in_x
from .errors import GridMismatch, InvalidBracket, NodeNotOnGrid, NotMonotone, SectorEscape
from .solver import IntegralOperator, SolveConfig, SolveReport, _check_grid, _iterate, as_kernel
from .timescale import Grid, TimeScale

ORDER_SLACK = 1e-9
SECTOR_SLACK = 1e-9


def default_slack(ts: TimeScale, step_h: float) -> float:
    """Verification slack: ``1e-9`` on discrete scales, ``10 C h^2`` otherwise."""
    if ts.is_discrete:
        return 1e-9
    return max(1e-9, 10 * quadrature_tol(step_h))


@dataclass(frozen=True)
class BracketPair:
    v: GridFunction
    w: GridFunction

    def __post_init__(self):
        if not self.v.grid.same_as(self.w.grid):
            raise GridMismatch("v and w live on different grids")
        excess = self.v.values - self.w.values
        if np.any(excess > 1e-12):
            j = int(np.argmax(excess))
            raise InvalidBracket(
                f"v > w at t={self.v.grid.nodes[j]!r} (by {excess[j]:.3g}); the sector is empty"
            )

    @property
    def grid(self) -> Grid:
        return self.v.grid


@dataclass(frozen=True)
class Verification:
    ok: bool
    defect: float  # worst signed defect; ok iff defect <= slack
    node: float

    def __bool__(self):
        return self.ok


def _defect(values: np.ndarray, grid: Grid, slack: float) -> Verification:
    j = int(np.argmax(values))
    worst = float(values[j])
    return Verification(worst <= slack, worst, float(grid.nodes[j]))


def verify_lower(ts: TimeScale, f, k, v: GridFunction, step_h: float, slack: float | None = None) -> Verification:
    """Check ``v(t) - f(t) - int_a^t k(t,s,v(s)) Δs <= slack`` at every node."""
    _check_grid(ts, v.grid, step_h)
    slack = default_slack(ts, step_h) if slack is None else slack
    op = IntegralOperator(v.grid, f, k)
    return _defect(v.values - op(v.values), v.grid, slack)


def verify_upper(ts: TimeScale, f, k, w: GridFunction, step_h: float, slack: float | None = None) -> Verification:
    """Check ``f(t) + int_a^t k(t,s,w(s)) Δs - w(t) <= slack`` at every node."""
    _check_grid(ts, w.grid, step_h)
    slack = default_slack(ts, step_h) if slack is None else slack
    op = IntegralOperator(w.grid, f, k)
    return _defect(op(w.values) - w.values, w.grid, slack)


class PenaltySign(str, enum.Enum):
    """Sign of the penalty above the upper solution.

    ``CORRECTED`` adds ``z/(1+z^2)`` with ``z = w - p < 0``, pulling values
    above ``w`` back down.  ``VERBATIM`` subtracts it instead, which pushes
    them further up.
    """

    CORRECTED = "corrected"
    VERBATIM = "verbatim"


class SectorLookup(str, enum.Enum):
    """Where the sector bounds are read when testing ``p``.

    ``OUTER`` compares ``p`` with ``v(t)``, ``w(t)``, the outer variable of
    the integral.  Since ``p`` is ``x(s)`` inside the integral, an increasing ``v``
    then penalizes values that lie inside the sector at ``s``.  ``INNER``
    reads ``v(s)``, ``w(s)`` for both the branch test and the penalty.
    """

    OUTER = "outer"
    INNER = "inner"


@dataclass(frozen=True)
class ModifiedKernelConfig:
    penalty_sign: PenaltySign = PenaltySign.CORRECTED
    lookup: SectorLookup = SectorLookup.OUTER


def _penalty(z):
    return z / (1.0 + z * z)


class ModifiedKernel:
    """Kernel clamped to the sector ``[v, w]`` plus a bounded penalty.

    ``G(t, s, p)`` equals ``k(t, s, p)`` for ``v(t) <= p <= w(t)``; below the
    sector it is ``k(t, s, v(s)) + z/(1+z^2)`` with ``z = v(t) - p`` and above
    it ``k(t, s, w(s)) + z/(1+z^2)`` with ``z = w(t) - p`` (corrected sign) or
    ``k(t, s, w(s)) - z/(1+z^2)`` (verbatim sign).  Since ``|z/(1+z^2)| <= 1/2``,
    ``G`` is bounded whenever ``k`` is bounded on the sector.

    ``t`` and ``s`` must be grid nodes; ``v`` and ``w`` are looked up there.
    """

    def __init__(self, k, v: GridFunction, w: GridFunction, cfg: ModifiedKernelConfig | None = None):
        pair = BracketPair(v, w)
        self.grid = pair.grid
        self.k = as_kernel(k)
        self.v = v
        self.w = w
        self.cfg = cfg or ModifiedKernelConfig()
        self._sign = 1.0 if PenaltySign(self.cfg.penalty_sign) is PenaltySign.CORRECTED else -1.0
        self._inner = SectorLookup(self.cfg.lookup) is SectorLookup.INNER

    def _lookup(self, t) -> np.ndarray:
        nodes = self.grid.nodes
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(nodes, t), 0, len(nodes) - 1)
        lower = np.clip(idx - 1, 0, len(nodes) - 1)
        idx = np.where(np.abs(nodes[lower] - t) < np.abs(nodes[idx] - t), lower, idx)
        if np.any(np.abs(nodes[idx] - t) > 1e-12):
            raise NodeNotOnGrid("modified kernel evaluated off the grid")
        return idx

    def __call__(self, t, s, p):
        t, s, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, s, p)))
        it = self._lookup(t)
        js = self._lookup(s)
        vt, wt = self.v.values[it], self.w.values[it]
        vs, ws = self.v.values[js], self.w.values[js]
        if self._inner:
            vt, wt = vs, ws
        below = p < vt
        above = p > wt
        inside = self.k(t, s, np.clip(p, vt, wt))
        out = np.array(np.broadcast_to(inside, p.shape), dtype=float)
        if np.any(below):
            kv = np.broadcast_to(self.k(t, s, vs), p.shape)
            out[below] = kv[below] + _penalty(vt - p)[below]
        if np.any(above):
            kw = np.broadcast_to(self.k(t, s, ws), p.shape)
            out[above] = kw[above] + self._sign * _penalty(wt - p)[above]
        return out


def modified_kernel(k, v: GridFunction, w: GridFunction, cfg: ModifiedKernelConfig | None = None) -> ModifiedKernel:
    return ModifiedKernel(k, v, w, cfg)


@dataclass
class PenalizedReport(SolveReport):
    in_sector: bool = True
    sector_excess: float = 0.0  # max of (v - x) and (x - w); <= 0 inside
    original_residual: float = 0.0  # defect against the unmodified kernel


def penalized_solve(
    ts: TimeScale,
    f,
    k,
    pair: BracketPair,
    cfg: SolveConfig,
    mk: ModifiedKernelConfig | None = None,
) -> tuple[GridFunction, PenalizedReport]:
    """Successive approximations for the modified-kernel equation, seeded at ``v``.

    Raises :class:`SectorEscape` if the result leaves ``[v, w]`` by more than
    ``1e-9``.  Inside the sector the result also solves the original equation;
    the report carries its residual against ``k``.
    """
    grid = pair.grid
    _check_grid(ts, grid, cfg.step_h)
    G = ModifiedKernel(k, pair.v, pair.w, mk)
    # the penalty is 1-Lipschitz and the clamp preserves k's constant
    L = None if cfg.lipschitz_L is None else max(cfg.lipschitz_L, 1.0)
    op = IntegralOperator(grid, f, G)
    run_cfg = SolveConfig(cfg.tol, cfg.max_iter, cfg.step_h, L)
    x, rep = _iterate(op, pair.v.values, run_cfg, ts.b - ts.a)
    excess = float(max(np.max(pair.v.values - x.values), np.max(x.values - pair.w.values)))
    if excess > SECTOR_SLACK:
        raise SectorEscape(f"penalized solution leaves [v, w] by {excess:.3g}")
    orig = IntegralOperator(grid, f, k)
    report = PenalizedReport(
        **vars(rep),
        in_sector=True,
        sector_excess=excess,
        original_residual=float(np.max(np.abs(x.values - orig(x.values)))),
    )
    return x, report


@dataclass(frozen=True)
class OrderingViolation:
    level: int
    node: float
    magnitude: float
    relation: str  # e.g. "v1<=v2", "v3<=w3", "w2<=w1"


@dataclass
class BracketReport:
    n_iters: int
    v_chain: list[GridFunction]
    w_chain: list[GridFunction]
    ordering_violations: list[OrderingViolation]
    alpha: GridFunction
    beta: GridFunction
    gap: float
    gaps: list[float] = field(default_factory=list)  # sup|w_n - v_n| for n = 0..n_iters
    monotone_warning: str | None = None


def _violations(lo: np.ndarray, hi: np.ndarray, grid: Grid, level: int, relation: str):
    excess = lo - hi
    return [
        OrderingViolation(level, float(grid.nodes[j]), float(excess[j]), relation)
        for j in np.flatnonzero(excess > ORDER_SLACK)
    ]


def monotone_iterate(
    ts: TimeScale,
    f,
    k,
    pair: BracketPair,
    n_iters: int,
    step_h: float,
    *,
    strict_monotone: bool = False,
    slack: float | None = None,
) -> BracketReport:
    """Build the lower and upper chains for ``n_iters`` levels.

    ``v`` and ``w`` are verified first (:class:`InvalidBracket` on failure).
    Monotonicity of ``k`` in ``x`` over the sector's value range is checked
    by sampling: a failure warns, or raises :class:`NotMonotone` with
    ``strict_monotone``.  Every violation of the chain ordering beyond
    ``1e-9`` is recorded in the report.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    grid = pair.grid
    _check_grid(ts, grid, step_h)
    lower = verify_lower(ts, f, k, pair.v, step_h, slack)
    if not lower:
        raise InvalidBracket(f"v is not a lower solution: defect {lower.defect:.3g} at t={lower.node!r}")
    upper = verify_upper(ts, f, k, pair.w, step_h, slack)
    if not upper:
        raise InvalidBracket(f"w is not an upper solution: defect {upper.defect:.3g} at t={upper.node!r}")

    note = None
    if isinstance(k, EXPR_TYPES):
        chk = check_monotone_in_x(k, grid, float(pair.v.values.min()), float(pair.w.values.max()))
        if not chk:
            note = f"kernel is not nondecreasing in x: witness (t, s, x1, x2) = {chk.witness}"
            if strict_monotone:
                raise NotMonotone(note)
            warnings.warn(note, RuntimeWarning, stacklevel=2)

    op = IntegralOperator(grid, f, k)
    vs = [pair.v.values]
    ws = [pair.w.values]
    violations = _violations(vs[0], ws[0], grid, 0, "v0<=w0")
    gaps = [float(np.max(np.abs(ws[0] - vs[0])))]
    for n in range(1, n_iters + 1):
        vn = op(vs[-1])
        wn = op(ws[-1])
        violations += _violations(vs[-1], vn, grid, n, f"v{n - 1}<=v{n}")
        violations += _violations(vn, wn, grid, n, f"v{n}<=w{n}")
        violations += _violations(wn, ws[-1], grid, n, f"w{n}<=w{n - 1}")
        vs.append(vn)
        ws.append(wn)
        gaps.append(float(np.max(np.abs(wn - vn))))
    v_chain = [GridFunction(grid, a) for a in vs]
    w_chain = [GridFunction(grid, a) for a in ws]
    return BracketReport(
        n_iters=n_iters,
        v_chain=v_chain,
        w_chain=w_chain,
        ordering_violations=violations,
        alpha=v_chain[-1],
        beta=w_chain[-1],
        gap=gaps[-1],
        gaps=gaps,
        monotone_warning=note,
    )


def extremal_bracket_check(x: GridFunction, report: BracketReport) -> tuple[bool, float]:
    """Is ``x`` between the chain limits (within ``1e-9``) at every node?

    Returns the verdict and the worst excursion outside the bracket
    (nonpositive when inside).
    """
    if not x.grid.same_as(report.alpha.grid):
        raise GridMismatch("x and the bracket live on different grids")
    lo = np.minimum(report.alpha.values, report.beta.values)
    hi = np.maximum(report.alpha.values, report.beta.values)
    worst = float(np.max(np.maximum(lo - x.values, x.values - hi)))
    return worst <= 1e-9, worst
