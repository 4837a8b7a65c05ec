"""
Delta integrals, derivatives and the generalized exponential
=============================================================

The same three operations reduce to sums on discrete scales and to ordinary
calculus on intervals.  On a hybrid scale they mix both behaviours.
"""

import math

import numpy as np

from tsvolterra import (
    GridFunction,
    TimeScale,
    delta_derivative,
    delta_integral,
    delta_vs_riemann_gap,
    discretize,
    exp_fn,
)

# On {0,...,5} the integral of g is the plain sum over the left endpoints.
z = TimeScale.integers(0, 5)
g = GridFunction.from_callable(discretize(z, 1.0), lambda t: t**2)
print("sum_{s<5} s^2 =", delta_integral(g, 0, 5))

# On [0,1] it is the trapezoid rule, exact for linear functions and
# second-order accurate otherwise.
for h in (0.1, 0.05, 0.025):
    sin = GridFunction.from_callable(discretize(TimeScale.interval(0, 1), h), np.sin)
    print(f"h={h:<6} int sin = {delta_integral(sin, 0, 1):.10f}  error {abs(delta_integral(sin, 0, 1) - (1 - math.cos(1))):.2e}")

# The delta derivative is a forward difference: exact at jumps.
hyb = TimeScale.parse("[0,1];{2}")
cube = GridFunction.from_callable(discretize(hyb, 0.01), lambda t: t**3)
print("delta derivative of t^3 at t=1 (jump to 2):", delta_derivative(cube, 1.0))

# e_p(t, 0) with p = 1 doubles at every integer step and grows like e^t on
# an interval.
one_z = GridFunction.constant(discretize(TimeScale.integers(0, 10), 1.0), 1.0)
print("e_1(10, 0) on Z:", exp_fn(one_z, 10, 0))
one_r = GridFunction.constant(discretize(TimeScale.interval(0, 1), 1e-3), 1.0)
print("e_1(1, 0) on [0,1]:", exp_fn(one_r, 1, 0), "vs e =", math.e)

# For nondecreasing functions the delta integral never exceeds the Riemann
# integral with gaps bridged linearly.
hyb2 = TimeScale.parse("[0,1];{1.5,2};[3,4]")
ramp = GridFunction.from_callable(discretize(hyb2, 0.1), lambda t: np.floor(t) + t / 10)
print("Riemann minus delta:", delta_vs_riemann_gap(ramp, 0, 4))
