"""Equations of motion for the free, monitored and indirectly measured atom.

The right-hand sides act on Bloch vectors of shape ``(..., 3)`` and are
defined on the whole ball, not only on physically reachable states.
:func:`integrate` advances any of them with classical fixed-step RK4, which
serves as the numerical check on the closed forms in :mod:`.analytic`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import expm

from .states import (
    BALL_SLACK,
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SqueezedBathParams,
    StateError,
    check_bloch,
    check_density,
)

Rhs = Callable[[NDArray[np.float64]], NDArray[np.float64]]

DEFAULT_DT = 1e-3
"""Default RK4 step in units of ``1/gamma``."""

PLUS_X_PROJECTOR = 0.5 * (IDENTITY + SIGMA_X)


class InvariantViolation(ArithmeticError):
    """An integrated state left the Bloch ball."""

    def __init__(self, step: int, norm: float):
        super().__init__(f"Bloch-ball invariant violated at step {step} (|b| = {norm:.6g})")
        self.step = step
        self.norm = norm


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0 + k * dt`` for ``k = 0 .. n_steps``."""

    t0: float = 0.0
    dt: float = DEFAULT_DT
    n_steps: int = 1000

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be an integer >= 1, got {self.n_steps}")

    @classmethod
    def spanning(cls, t_end: float, dt: float = DEFAULT_DT, t0: float = 0.0) -> "TimeGrid":
        """Grid from ``t0`` to (the nearest step to) ``t_end``."""
        return cls(t0=t0, dt=dt, n_steps=max(1, int(round((t_end - t0) / dt))))

    @property
    def times(self) -> NDArray[np.float64]:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.n_steps


@dataclass(frozen=True)
class Trajectory:
    """Bloch vectors sampled on a grid; ``states`` has shape ``(n_steps + 1, ..., 3)``."""

    grid: TimeGrid
    states: NDArray[np.float64]

    @property
    def t(self) -> NDArray[np.float64]:
        return self.grid.times

    @property
    def rho_x(self) -> NDArray[np.float64]:
        return self.states[..., 0]

    @property
    def rho_y(self) -> NDArray[np.float64]:
        return self.states[..., 1]

    @property
    def rho_z(self) -> NDArray[np.float64]:
        return self.states[..., 2]

    @property
    def p_plus(self) -> NDArray[np.float64]:
        """Single-shot probability of the +1 outcome of sx at each sample."""
        return 0.5 * (1.0 + self.states[..., 0])

    def component(self, name: str) -> NDArray[np.float64]:
        return self.states[..., "xyz".index(name)]


def lindblad_rhs(p: SqueezedBathParams, rho: ArrayLike) -> NDArray[np.complex128]:
    """Squeezed-bath Lindblad generator applied to a 2x2 density matrix."""
    rho = check_density(rho)
    sp, sm = SIGMA_PLUS, SIGMA_MINUS
    spsm, smsp = sp @ sm, sm @ sp
    emission = 2 * sm @ rho @ sp - spsm @ rho - rho @ spsm
    absorption = 2 * sp @ rho @ sm - smsp @ rho - rho @ smsp
    phase = np.exp(1j * p.phi)
    return (
        0.5 * p.gamma * (p.n_bar + 1) * emission
        + 0.5 * p.gamma * p.n_bar * absorption
        - p.gamma * p.m * phase * (sp @ rho @ sp)
        - p.gamma * p.m * np.conj(phase) * (sm @ rho @ sm)
    )


def _transverse_rhs(p: SqueezedBathParams, b: NDArray) -> tuple[NDArray, NDArray]:
    half = p.n_bar + 0.5
    mc, ms = p.m * np.cos(p.phi), p.m * np.sin(p.phi)
    x, y = b[..., 0], b[..., 1]
    dx = p.gamma * (-(half + mc) * x + ms * y)
    dy = p.gamma * (-(half - mc) * y + ms * x)
    return dx, dy


def bloch_rhs_free(p: SqueezedBathParams, b: ArrayLike) -> NDArray[np.float64]:
    """Time derivative of the Bloch vector with no measurement."""
    b = np.asarray(b, dtype=float)
    dx, dy = _transverse_rhs(p, b)
    dz = -p.gamma * (2.0 * p.n_bar + 1.0) * b[..., 2] - p.gamma
    return np.stack(np.broadcast_arrays(dx, dy, dz), axis=-1)


def bloch_rhs_projective(p: SqueezedBathParams, b: ArrayLike) -> NDArray[np.float64]:
    """Time derivative under continuous projective monitoring of sx.

    Only ``rho_x`` moves; after the first collapse ``rho_y = rho_z = 0`` and
    ``rho_x`` decays at ``gamma (N + 1/2 + M cos phi)``. Started from an
    uncollapsed state with ``rho_y != 0`` the flow can leave the Bloch ball.
    """
    b = np.asarray(b, dtype=float)
    dx, _ = _transverse_rhs(p, b)
    zero = np.zeros_like(dx)
    return np.stack(np.broadcast_arrays(dx, zero, zero), axis=-1)


def bloch_rhs_indirect(p: SqueezedBathParams, T0: float, b: ArrayLike) -> NDArray[np.float64]:
    """Free dynamics plus the double-commutator measurement term ``-(1/T0)[sx,[sx,rho]]``.

    The extra term damps ``rho_y`` and ``rho_z`` at ``4 / T0``.
    """
    if not T0 > 0:
        raise ValueError(f"T0 must be > 0, got {T0}")
    b = np.asarray(b, dtype=float)
    d = bloch_rhs_free(p, b)
    d[..., 1:] -= (4.0 / T0) * b[..., 1:]
    return d


def projective_collapse(rho: ArrayLike) -> NDArray[np.complex128]:
    """Non-selective sx measurement ``P rho P + (1 - P) rho (1 - P)``.

    Evaluated as the equivalent ``(rho + sx rho sx) / 2``, which only swaps
    and averages entries and is therefore exactly idempotent in floating point.
    """
    rho = check_density(rho)
    return 0.5 * (rho + SIGMA_X @ rho @ SIGMA_X)


def collapse_bloch(b: ArrayLike) -> NDArray[np.float64]:
    """Bloch-vector form of :func:`projective_collapse`: ``(x, y, z) -> (x, 0, 0)``."""
    out = np.array(b, dtype=float)
    out[..., 1:] = 0.0
    return out


def _ball_norm(b: NDArray) -> float:
    return float(np.sqrt(np.max(np.einsum("...i,...i->...", b, b))))


def integrate(rhs: Rhs, b0: ArrayLike, grid: TimeGrid, check: bool = True) -> Trajectory:
    """Classical fourth-order Runge-Kutta on a fixed grid.

    ``rhs`` maps Bloch vectors to their derivatives; bind parameters with
    :func:`functools.partial`, e.g. ``partial(bloch_rhs_free, p)``. A batch of
    initial states (shape ``(..., 3)``) is advanced in lockstep.

    Raises:
        InvariantViolation: if ``check`` and any sample leaves the unit ball.
    """
    b = check_bloch(b0).copy()
    h = grid.dt
    out = np.empty((grid.n_steps + 1,) + b.shape)
    out[0] = b
    for k in range(1, grid.n_steps + 1):
        k1 = rhs(b)
        k2 = rhs(b + 0.5 * h * k1)
        k3 = rhs(b + 0.5 * h * k2)
        k4 = rhs(b + h * k3)
        b = b + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if check:
            norm = _ball_norm(b)
            if not norm <= 1.0 + BALL_SLACK:
                raise InvariantViolation(k, norm)
        out[k] = b
    return Trajectory(grid, out)


def affine_generator(rhs: Rhs) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Recover ``(A, c)`` with ``rhs(b) = A b + c`` by probing the basis vectors."""
    c = np.asarray(rhs(np.zeros(3)), dtype=float)
    A = np.column_stack([np.asarray(rhs(e), dtype=float) - c for e in np.eye(3)])
    return A, c


def propagate_affine(rhs: Rhs, b0: ArrayLike, grid: TimeGrid, check: bool = True) -> Trajectory:
    """Exact flow of an affine right-hand side, sampled on ``grid``.

    Uses the augmented 4x4 matrix exponential, so it stays accurate for
    arbitrarily stiff rates (e.g. indirect measurement with tiny ``T0``)
    where fixed-step RK4 is unstable.
    """
    A, c = affine_generator(rhs)
    gen = np.zeros((4, 4))
    gen[:3, :3] = A
    gen[:3, 3] = c
    step = expm(grid.dt * gen)
    b = check_bloch(b0).copy()
    if b.shape != (3,):
        raise StateError("propagate_affine takes a single initial state")
    out = np.empty((grid.n_steps + 1, 3))
    out[0] = b
    for k in range(1, grid.n_steps + 1):
        b = step[:3, :3] @ b + step[:3, 3]
        if check:
            norm = _ball_norm(b)
            if not norm <= 1.0 + BALL_SLACK:
                raise InvariantViolation(k, norm)
        out[k] = b
    return Trajectory(grid, out)


def _rough_rate(t: NDArray, v: NDArray) -> float:
    a = np.abs(v)
    if a[0] == 0:
        return 0.0
    below = np.nonzero(a <= a[0] / np.e)[0]
    if below.size:
        return 1.0 / (t[below[0]] - t[0])
    if a[-1] == 0 or np.sign(v[0]) != np.sign(v[-1]):
        return 0.0
    return float(-np.log(a[-1] / a[0]) / (t[-1] - t[0]))


def fit_decay_rate(
    traj: Trajectory,
    component: Literal["x", "y", "z"],
    window: Optional[tuple[float, float]] = None,
    offset: float = 0.0,
) -> float:
    """Least-squares decay rate of ``|component - offset|`` on a log scale.

    By default the fit window is ``[0.1, 1.0] / r`` past the first sample,
    where ``r`` is the inverse of the time taken for ``|value|`` to fall by
    a factor ``e`` (two-point estimate from the endpoints if it never
    does). The window is clipped to the trajectory and falls back to all
    samples if fewer than three remain. Pass ``window=(t_start, t_stop)``
    to override.

    Raises:
        ValueError: if the values change sign or touch zero inside the window.
    """
    t = traj.t
    v = traj.component(component) - offset
    if v.ndim != 1:
        raise ValueError("fit_decay_rate expects a single-state trajectory")
    if window is None:
        r_est = _rough_rate(t, v)
        if r_est > 0:
            window = (t[0] + 0.1 / r_est, t[0] + 1.0 / r_est)
        else:
            window = (t[0], t[-1])
    mask = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    if mask.sum() < 3:
        mask = np.ones_like(t, dtype=bool)
    tw, vw = t[mask], v[mask]
    if np.any(vw == 0) or not (np.all(vw > 0) or np.all(vw < 0)):
        raise ValueError(f"component {component!r} changes sign or vanishes inside the fit window")
    slope = np.polyfit(tw, np.log(np.abs(vw)), 1)[0]
    return float(-slope)
