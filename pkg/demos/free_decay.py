"""
Free decay in a squeezed vacuum
===============================

An atom sitting in broadband squeezed vacuum loses its coherence along
two transverse directions at very different rates. Here we look at those
rates, check the integrator against the closed form, and fit the rates
back out of a trajectory.
"""

import math
from functools import partial

import numpy as np

from squeezed_zeno import analytic, make_params
from squeezed_zeno.dynamics import TimeGrid, bloch_rhs_free, fit_decay_rate, integrate
from squeezed_zeno.scenarios import run_table1

b0 = np.array([0.5, -math.sqrt(0.75), 0.0])

# With N = 1 the squeezing correlation is M = sqrt(2), and the two
# transverse rates split far apart around N + 1/2.
p = make_params(n_bar=1.0, phi=0.0, gamma=1.0)
rates = analytic.decay_rates(p)
print(f"fast {rates.fast:.7f}  slow {rates.slow:.7f}  longitudinal {rates.longitudinal:.1f}")

# RK4 on the Bloch equations against the closed form.
grid = TimeGrid.spanning(5.0, 1e-3)
traj = integrate(partial(bloch_rhs_free, p), b0, grid)
err = np.max(np.abs(traj.states - analytic.free_solution(p, b0, grid.times)))
print(f"max RK4 error over [0, 5]: {err:.2e}")

# At phi = 0 rho_x is the fast mode on its own, so a log-linear fit
# recovers the fast rate.
print(f"fitted rho_x rate: {fit_decay_rate(traj, 'x'):.7f}")

# The four purely exponential phases, analytic next to fitted.
table = run_table1([1.0], b0)
print()
print(f"{'row':8s} {'phi':>8s} {'rate_x':>10s} {'rate_y':>10s} {'fit_x':>10s} {'fit_y':>10s}")
for n, g, label, phi, rx, ry, fx, fy in table.rows:
    print(f"{label:8s} {phi:8.4f} {rx:10.7f} {ry:10.7f} {fx:10.7f} {fy:10.7f}")

# The population settles at -1/(2N + 1), but the slow mode takes its time.
for t in (5.0, 20.0, 100.0, 200.0):
    print(f"t = {t:5.0f}: {np.round(analytic.free_solution(p, b0, t), 8)}")
