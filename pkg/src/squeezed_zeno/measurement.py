"""Repeated sx measurements at a finite interval.

Three engines share one protocol: measure sx at ``t = 0`` and then every
``dt`` for ``n_steps`` further intervals, with free evolution in between.

* :func:`sequential_survival` multiplies the exact per-measurement
  probabilities of obtaining +1 every time.
* :func:`stochastic_survival` samples the outcomes trajectory by trajectory.
* :func:`repeated_measurement_evolution` applies the non-selective collapse
  and returns the averaged Bloch trajectory.

As ``dt -> 0`` at fixed ``t = n_steps * dt`` they approach
:func:`.analytic.p_plus_continuous` and :func:`.analytic.measured_solution`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .analytic import free_solution
from .dynamics import TimeGrid, Trajectory, collapse_bloch
from .states import SqueezedBathParams, check_bloch

PLUS_X = np.array([1.0, 0.0, 0.0])

BLOCK_SIZE = 65536
"""Trajectories per random stream.

Block ``i`` draws from ``numpy.random.Generator(PCG64(SeedSequence(seed,
spawn_key=(i,))))``, consuming one ``random()`` double per live trajectory
per measurement. Results therefore do not depend on how blocks are
scheduled across workers.
"""


@dataclass(frozen=True)
class McConfig:
    """Measurement protocol: ``n_steps`` intervals of length ``dt`` after the first measurement.

    The bath is treated as Markovian, so any ``dt > 0`` is accepted. Physically
    the interval must still exceed the bath correlation time; checking that is
    left to the caller.
    """

    dt: float
    n_steps: int
    n_traj: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError(f"n_steps must be an integer >= 0, got {self.n_steps}")
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise ValueError(f"n_traj must be an integer >= 1, got {self.n_traj}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def t_end(self) -> float:
        return self.n_steps * self.dt


@dataclass(frozen=True)
class SurvivalEstimate:
    p_hat: float
    std_err: float
    n_traj: int


def _p_plus(b) -> float:
    return 0.5 * (1.0 + float(b[0]))


def per_step_survival(p: SqueezedBathParams, dt: float) -> float:
    """Probability of +1 at the next measurement, given +1 at the last one."""
    return _p_plus(free_solution(p, PLUS_X, dt))


def sequential_survival(p: SqueezedBathParams, b0: ArrayLike, cfg: McConfig) -> float:
    """Exact probability that all ``n_steps + 1`` sx outcomes are +1.

    Each +1 outcome leaves the atom in ``|+x>``, so every factor after the
    first is the same :func:`per_step_survival`.
    """
    b0 = check_bloch(b0)
    first = _p_plus(b0)
    if cfg.n_steps == 0:
        return first
    return first * float(np.exp(cfg.n_steps * np.log(per_step_survival(p, cfg.dt))))


def _survivors_in_block(p_first: float, p_next: float, n_steps: int, size: int, seed: int, index: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    counts = np.zeros(n_steps + 1, dtype=np.int64)
    alive = size
    prob = p_first
    for k in range(n_steps + 1):
        if alive == 0:
            break
        alive = int(np.count_nonzero(rng.random(alive) < prob))
        counts[k] = alive
        # Every survivor has just been projected onto |+x>.
        prob = p_next
    return counts


def _survivor_counts(p, b0, cfg: McConfig, workers: int) -> np.ndarray:
    b0 = check_bloch(b0)
    p_first = _p_plus(b0)
    p_next = per_step_survival(p, cfg.dt) if cfg.n_steps else 1.0
    sizes = [BLOCK_SIZE] * (cfg.n_traj // BLOCK_SIZE)
    if cfg.n_traj % BLOCK_SIZE:
        sizes.append(cfg.n_traj % BLOCK_SIZE)

    def run(i):
        return _survivors_in_block(p_first, p_next, cfg.n_steps, sizes[i], cfg.seed, i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(i) for i in range(len(sizes))]
    return np.sum(blocks, axis=0)


def stochastic_survival_curve(p: SqueezedBathParams, b0: ArrayLike, cfg: McConfig, workers: int = 1) -> np.ndarray:
    """Surviving fraction after each of the ``n_steps + 1`` measurements."""
    return _survivor_counts(p, b0, cfg, workers) / cfg.n_traj


def stochastic_survival(
    p: SqueezedBathParams, b0: ArrayLike, cfg: McConfig, workers: int = 1
) -> SurvivalEstimate:
    """Monte Carlo estimate of :func:`sequential_survival`.

    Each trajectory draws its outcome at every measurement with the Born
    probability of its current state and stops at the first -1. The estimate
    is the surviving fraction with binomial standard error.

    Args:
        workers: Threads over which trajectory blocks are spread; the result
            is bit-identical for any value.
    """
    p_hat = float(_survivor_counts(p, b0, cfg, workers)[-1]) / cfg.n_traj
    std_err = float(np.sqrt(p_hat * (1.0 - p_hat) / cfg.n_traj))
    return SurvivalEstimate(p_hat=p_hat, std_err=std_err, n_traj=cfg.n_traj)


def repeated_measurement_evolution(p: SqueezedBathParams, b0: ArrayLike, cfg: McConfig) -> Trajectory:
    """Ensemble Bloch vector just after each non-selective sx measurement.

    Sample ``k`` sits at ``t = k * dt``; sample 0 is ``b0`` after the first
    collapse, so ``rho_y`` and ``rho_z`` are exactly zero throughout.
    """
    if cfg.n_steps < 1:
        raise ValueError("repeated_measurement_evolution needs n_steps >= 1")
    grid = TimeGrid(0.0, cfg.dt, cfg.n_steps)
    out = np.empty((cfg.n_steps + 1, 3))
    b = collapse_bloch(check_bloch(b0))
    out[0] = b
    for k in range(1, cfg.n_steps + 1):
        b = collapse_bloch(free_solution(p, b, cfg.dt))
        out[k] = b
    return Trajectory(grid, out)
