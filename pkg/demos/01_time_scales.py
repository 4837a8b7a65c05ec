"""
Time scales, jump operators and grids
=====================================

A time scale here is a finite union of closed intervals and isolated points.
This script builds a few of them, walks the jump operators, and shows how a
grid mixes dense segments with jumps.
"""

import numpy as np

from tsvolterra import TimeScale, classify, discretize, graininess, rho, sigma

# The integers 0..5, the unit interval, and a hybrid of both worlds.
z = TimeScale.integers(0, 5)
unit = TimeScale.interval(0, 1)
hybrid = TimeScale.parse("[0,1];{1.5,2};[3,4]")
print(hybrid)

# On the integers every point jumps forward by one, except the last one,
# which is its own successor.
for t in range(6):
    print(f"Z: sigma({t}) = {sigma(z, t):g}  mu = {graininess(z, t):g}")

# On the hybrid scale the right end of [0,1] is right-scattered: the next
# point of the scale is 1.5.
for t in (0.5, 1.0, 1.5, 2.0, 3.0, 4.0):
    print(f"t={t:<4} sigma={sigma(hybrid, t):<4g} rho={rho(hybrid, t):<4g} {classify(hybrid, t)}")

# A grid puts uniform nodes on each interval and keeps isolated points as
# they are.  The ``dense`` mask tells, per segment, whether it lies inside an
# interval (True) or is a jump between components (False).
grid = discretize(hybrid, 0.25)
print("nodes:", grid.nodes)
print("dense segments:", grid.dense.astype(int))
print("graininess at nodes:", np.round(grid.graininess, 3))

# Interval grids are dense everywhere, point grids jump everywhere.
print(discretize(unit, 0.1).dense.all(), discretize(z, 1.0).dense.any())
