"""
Indirect measurement
====================

A meter weakly coupled to sigma_x damps rho_y and rho_z at 4/T0. Small T0
reproduces projective monitoring and large T0 leaves the atom alone. Very
small T0 is too stiff for plain RK4, so the exact affine propagator is used
there.
"""

import math
from functools import partial

import numpy as np

from squeezed_zeno import InvariantViolation, analytic, make_params
from squeezed_zeno.dynamics import (
    TimeGrid,
    bloch_rhs_indirect,
    bloch_rhs_projective,
    collapse_bloch,
    integrate,
    propagate_affine,
)

b0 = np.array([0.5, -math.sqrt(0.75), 0.0])
p = make_params(1.0, analytic.critical_phase_zeno(b0))
grid = TimeGrid.spanning(2.0, 1e-3)

projective = integrate(partial(bloch_rhs_projective, p), collapse_bloch(b0), grid)
free = analytic.free_solution(p, b0, grid.times)

for T0 in (1e-6, 1e-2, 1.0, 1e2, 1e6):
    traj = propagate_affine(partial(bloch_rhs_indirect, p, T0), b0, grid)
    to_proj = np.max(np.abs(traj.states[1:] - projective.states[1:]))
    to_free = np.max(np.abs(traj.states - free))
    print(f"T0 = {T0:7.0e}  rho_x(2) = {traj.rho_x[-1]:.6f}  gap to projective {to_proj:.1e}  gap to free {to_free:.1e}")

# RK4 leaves the Bloch ball on the first step when 4/T0 * dt is huge.
try:
    integrate(partial(bloch_rhs_indirect, p, 1e-6), b0, grid)
except InvariantViolation as exc:
    print(f"\nRK4 at T0 = 1e-6: {exc}")
