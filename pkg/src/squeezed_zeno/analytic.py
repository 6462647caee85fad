"""Closed-form evolution, decay rates and survival probabilities.

The transverse Bloch components relax along two eigen-directions set by the
squeezing phase: ``(sin(phi/2), cos(phi/2))`` at the slow rate
``gamma (N + 1/2 - M)`` and ``(cos(phi/2), -sin(phi/2))`` at the fast rate
``gamma (N + 1/2 + M)``. The longitudinal component relaxes at
``gamma (2N + 1)`` towards ``-1 / (2N + 1)``.

Time enters every formula through the dimensionless ``tau = gamma * t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .states import Scalar, SqueezedBathParams, StateError, check_bloch, normalize_phase

__all__ = [
    "DecayRates",
    "FieldFluctuations",
    "critical_phase_antizeno",
    "critical_phase_zeno",
    "decay_rates",
    "field_fluctuations",
    "free_solution",
    "measured_rate",
    "measured_solution",
    "mode_coefficients",
    "p_plus_continuous",
    "p_plus_single",
    "steady_state",
]


@dataclass(frozen=True)
class DecayRates:
    """Relaxation rates of the free dynamics (units of 1/time)."""

    fast: Scalar
    slow: Scalar
    longitudinal: Scalar


@dataclass(frozen=True)
class FieldFluctuations:
    """Second moments of the fictitious magnetic field, in units of ``Gamma``.

    ``b_transverse2`` is ``<Bx^2> + <By^2>``.
    """

    bx2: Scalar
    by2: Scalar
    b_transverse2: Scalar


def _check_time(t: ArrayLike) -> NDArray[np.float64]:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("times must be finite and >= 0")
    return t


def decay_rates(p: SqueezedBathParams) -> DecayRates:
    half = p.n_bar + 0.5
    return DecayRates(
        fast=p.gamma * (half + p.m),
        slow=p.gamma * (half - p.m),
        longitudinal=p.gamma * (2.0 * p.n_bar + 1.0),
    )


def measured_rate(p: SqueezedBathParams) -> Scalar:
    """Decay rate of ``rho_x`` under continuous projective monitoring of sx."""
    return p.gamma * (p.n_bar + 0.5 + p.m * np.cos(p.phi))


def steady_state(p: SqueezedBathParams) -> NDArray[np.float64]:
    """Fixed point ``(0, 0, -1/(2N+1))`` of the free dynamics."""
    z = -1.0 / (2.0 * np.asarray(p.n_bar) + 1.0)
    return np.stack(np.broadcast_arrays(0.0 * z, 0.0 * z, z), axis=-1)


def mode_coefficients(phi: ArrayLike, b0: ArrayLike) -> tuple[NDArray, NDArray]:
    """Slow- and fast-mode amplitudes of ``rho_x`` in the free solution.

    Returns ``(slow, fast)`` where ``rho_x(t) = slow e^{-slow t} + fast e^{-fast t}``.
    They sum to ``rho_x(0)``.
    """
    b0 = np.asarray(b0, dtype=float)
    s, c = np.sin(0.5 * np.asarray(phi)), np.cos(0.5 * np.asarray(phi))
    x0, y0 = b0[..., 0], b0[..., 1]
    return x0 * s * s + y0 * s * c, x0 * c * c - y0 * s * c


def free_solution(p: SqueezedBathParams, b0: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
    """Exact Bloch vector at time(s) ``t`` under the undisturbed master equation.

    Args:
        p: Bath parameters (may hold broadcastable arrays).
        b0: Initial Bloch vector(s), shape ``(..., 3)``.
        t: Time or array of times, all ``>= 0``.

    Returns:
        Array of shape ``broadcast(t, b0[..., 0]) + (3,)``; exactly ``b0`` at ``t = 0``.
    """
    b0 = check_bloch(b0)
    t = _check_time(t)
    tau = p.gamma * t
    half = p.n_bar + 0.5
    e_slow = np.exp(-tau * (half - p.m))
    e_fast = np.exp(-tau * (half + p.m))
    s, c = np.sin(0.5 * p.phi), np.cos(0.5 * p.phi)
    x0, y0, z0 = b0[..., 0], b0[..., 1], b0[..., 2]
    sc = s * c
    x = (x0 * s * s + y0 * sc) * e_slow + (x0 * c * c - y0 * sc) * e_fast
    y = (y0 * c * c + x0 * sc) * e_slow + (y0 * s * s - x0 * sc) * e_fast
    k = 2.0 * p.n_bar + 1.0
    e_long = np.exp(-tau * k)
    z = z0 * e_long + (e_long - 1.0) / k
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def _transverse(b0: ArrayLike) -> tuple[float, float]:
    b0 = check_bloch(b0)
    x0, y0 = float(b0[0]), float(b0[1])
    if x0 == 0.0 and y0 == 0.0:
        raise StateError("critical phase undefined for a state with no transverse component")
    return x0, y0


def critical_phase_zeno(b0: ArrayLike) -> float:
    """Phase at which ``b0``'s transverse part lies entirely on the fast mode.

    Free ``rho_x`` and ``rho_y`` then both decay at the fast rate, while a
    monitored ``rho_x`` decays at the slower ``gamma (N + 1/2 + M cos phi)``.
    """
    x0, y0 = _transverse(b0)
    return normalize_phase(2.0 * np.arctan2(-y0, x0))


def critical_phase_antizeno(b0: ArrayLike) -> float:
    """Phase at which ``b0``'s transverse part lies entirely on the slow mode."""
    x0, y0 = _transverse(b0)
    return normalize_phase(2.0 * np.arctan2(x0, y0))


def field_fluctuations(p: SqueezedBathParams, Gamma: float = 1.0) -> FieldFluctuations:
    """Quadrature fluctuations ``<Bx^2>``, ``<By^2>`` of the fictitious field.

    The sum ``Gamma (2N + 1)`` does not depend on the squeezing phase.
    """
    if not Gamma > 0:
        raise ValueError("Gamma must be > 0")
    half = p.n_bar + 0.5
    mc = p.m * np.cos(p.phi)
    bx2 = Gamma * (half - mc)
    by2 = Gamma * (half + mc)
    return FieldFluctuations(bx2=bx2, by2=by2, b_transverse2=Gamma * (2.0 * p.n_bar + 1.0))


def p_plus_single(p: SqueezedBathParams, b0: ArrayLike, t: ArrayLike) -> Scalar:
    """Probability of the +1 outcome of a single sx measurement at time ``t``."""
    out = 0.5 * (1.0 + free_solution(p, b0, t)[..., 0])
    return float(out) if out.ndim == 0 else out


def p_plus_continuous(p: SqueezedBathParams, b0: ArrayLike, t: ArrayLike) -> Scalar:
    """Probability that every sx outcome is +1 under continuous monitoring from t = 0.

    The first measurement succeeds with ``(1 + rho_x(0)) / 2``; afterwards the
    state stays pinned at ``|+x>`` and survives at half the monitored rate.
    """
    b0 = check_bloch(b0)
    t = _check_time(t)
    out = 0.5 * (1.0 + b0[..., 0]) * np.exp(-0.5 * measured_rate(p) * t)
    return float(out) if np.ndim(out) == 0 else out


def measured_solution(p: SqueezedBathParams, rho_x0: ArrayLike, t: ArrayLike) -> Scalar:
    """``rho_x`` under continuous projective monitoring of sx; ``rho_y = rho_z = 0``."""
    rho_x0 = np.asarray(rho_x0, dtype=float)
    if np.any(np.abs(rho_x0) > 1.0):
        raise StateError("|rho_x0| must be <= 1")
    t = _check_time(t)
    out = rho_x0 * np.exp(-measured_rate(p) * t)
    return float(out) if np.ndim(out) == 0 else out
