"""
Lower and upper solutions
=========================

If ``v <= w`` are a lower and an upper solution and the kernel is
nondecreasing in ``x``, iterating the integral operator from ``v`` and from
``w`` gives two monotone chains.  Their limits are the smallest and largest
solutions between ``v`` and ``w``.
"""

import numpy as np

from tsvolterra import (
    BracketPair,
    GridFunction,
    SolveConfig,
    TimeScale,
    discretize,
    modified_kernel,
    monotone_iterate,
    parse,
    penalized_solve,
    verify_lower,
    verify_upper,
)

f, k = parse("1"), parse("x")
z = TimeScale.integers(0, 10)
grid = discretize(z, 1.0)
v = GridFunction.constant(grid, 0.0)
w = GridFunction(grid, 2.0 ** (grid.nodes + 1))

print("v is a lower solution:", bool(verify_lower(z, f, k, v, 1.0)))
print("w is an upper solution:", bool(verify_upper(z, f, k, w, 1.0)))

rep = monotone_iterate(z, f, k, BracketPair(v, w), 12, 1.0)
print("gap per level:", rep.gaps)
print("alpha:", rep.alpha.values)
print("ordering violations:", len(rep.ordering_violations))

# Outside the sector the modified kernel freezes k at the nearest bound and
# adds a bounded penalty pushing back inside.
G = modified_kernel(parse("0"), GridFunction.constant(grid, 0.0), GridFunction.constant(grid, 1.0))
for p in (-1.0, 0.5, 2.0):
    print(f"G(3, 1, {p}) = {G(3, 1, p)}")

# Solving with the modified kernel keeps the solution inside [v, w].
x, prep = penalized_solve(z, f, k, BracketPair(v, w), SolveConfig(step_h=1.0))
print("penalized solution inside the sector:", prep.in_sector, " residual:", prep.original_residual)

# On an interval the chains converge at the rate of the exponential series.
unit = TimeScale.interval(0, 1)
g = discretize(unit, 1e-3)
rep = monotone_iterate(unit, f, k, BracketPair(GridFunction.constant(g, 0.0), GridFunction(g, 4 + 4 * g.nodes)), 20, 1e-3)
print("interval gaps:", np.array(rep.gaps[::4]))
print("alpha(1) =", rep.alpha(1))
