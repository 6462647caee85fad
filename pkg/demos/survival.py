"""
Survival of the +x outcome
==========================

A single measurement at time t finds +x with probability (1 + rho_x(t))/2.
A dense sequence of measurements that all return +x is rarer, except in a
short window near the Zeno phase. We compare the closed form, the
finite-interval product and a Monte Carlo estimate.
"""

import math

import numpy as np

from squeezed_zeno import analytic, make_params
from squeezed_zeno.measurement import McConfig, sequential_survival, stochastic_survival

b0 = np.array([0.5, -math.sqrt(0.75), 0.0])

for label, phi in (("phi = 0", 0.0), ("phi_Z", analytic.critical_phase_zeno(b0))):
    p = make_params(1.0, phi)
    print(label)
    for t in (0.05, 0.1, 0.5, 1.0):
        single = analytic.p_plus_single(p, b0, t)
        every = analytic.p_plus_continuous(p, b0, t)
        print(f"  t = {t:4.2f}  single {single:.5f}  all +x {every:.5f}")

# The product over measurements spaced dt tends to the exponential law,
# with an error that shrinks in proportion to dt.
p = make_params(1.0)
exact = analytic.p_plus_continuous(p, b0, 1.0)
print()
for dt in (1e-2, 5e-3, 1e-3):
    val = sequential_survival(p, b0, McConfig(dt, round(1 / dt)))
    print(f"dt = {dt:6.0e}  product {val:.6f}  error {abs(val - exact):.2e}")

# Sampling trajectories one outcome at a time gives the same number within
# its standard error. Seeds make the estimate reproducible.
cfg = McConfig(dt=1e-2, n_steps=100, n_traj=100_000, seed=7)
est = stochastic_survival(p, b0, cfg)
print(f"\nMonte Carlo {est.p_hat:.5f} +/- {est.std_err:.5f}, product {sequential_survival(p, b0, cfg):.5f}")
