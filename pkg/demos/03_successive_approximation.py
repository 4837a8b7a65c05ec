"""
Solving a Volterra equation by successive approximation
========================================================

We solve ``x(t) = f(t) + int_a^t k(t, s, x(s)) Δs`` with Picard iteration
and compare each step with its factorial a-priori bound.
"""

import math

from tsvolterra import GridFunction, SolveConfig, TimeScale, discretize, parse, picard_solve

f, k = parse("1"), parse("x")

# On the integers the equation is a recurrence and its solution is 2^t.
# The iteration becomes exact after as many steps as there are nodes.
z = TimeScale.integers(0, 10)
x, rep = picard_solve(z, f, k, GridFunction.constant(discretize(z, 1.0), 0.0),
                      SolveConfig(step_h=1.0, lipschitz_L=1.0))
print("Z solution:", x.values)
print("stop reason:", rep.stop_reason.value, "after", rep.iterations, "iterations")
print(f"{'k':>3} {'delta':>12} {'bound':>14}")
for n, (d, b) in enumerate(zip(rep.deltas, rep.apriori_bounds), start=1):
    print(f"{n:>3} {d:>12g} {b:>14.6g}")

# On [0,1] the solution is e^t.  With a Lipschitz constant the solver can
# stop once the remaining tail of the bound series drops below tol.
unit = TimeScale.interval(0, 1)
for h in (1e-2, 1e-3):
    seed = GridFunction.constant(discretize(unit, h), 0.0)
    x, rep = picard_solve(unit, f, k, seed, SolveConfig(step_h=h, lipschitz_L=1.0))
    print(f"h={h:g}: x(1) = {x(1):.12f}  error {abs(x(1) - math.e):.2e}  ({rep.stop_reason.value})")

# A nonlinear kernel on a hybrid scale.
hyb = TimeScale.parse("[0,1];{1.5,2};[3,4]")
k2 = parse("0.4*x*(2-x)*exp(-(t-s))")
seed = GridFunction.constant(discretize(hyb, 0.01), 0.0)
x, rep = picard_solve(hyb, parse("0.5"), k2, seed, SolveConfig(step_h=0.01, tol=1e-12))
print("hybrid scale: x(4) =", x(4), "residual", rep.residual)
