"""Bath parameters and two-level state representations.

A qubit state is carried either as a Bloch vector ``(rho_x, rho_y, rho_z)``
or as a 2x2 density matrix ``rho = (1 + rho_x sx + rho_y sy + rho_z sz) / 2``.
Most numerical routines work on plain ``ndarray`` Bloch vectors with a
trailing axis of length 3, so single states and batches share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

BALL_SLACK = 1e-12
"""Numeric slack allowed on ``|b| <= 1`` before a state is rejected."""

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

Scalar = Union[float, NDArray[np.float64]]


class StateError(ValueError):
    """Raised when a state or parameter set violates its invariants."""


class BlochState(NamedTuple):
    """A single Bloch vector. Unpacks and converts to an array like a tuple."""

    rho_x: float
    rho_y: float
    rho_z: float

    @classmethod
    def from_array(cls, b: ArrayLike) -> "BlochState":
        arr = check_bloch(b)
        if arr.shape != (3,):
            raise StateError(f"expected a single Bloch vector, got shape {arr.shape}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.rho_x**2 + self.rho_y**2 + self.rho_z**2))


def bloch_state(rho_x: float, rho_y: float, rho_z: float) -> BlochState:
    """Validated constructor for :class:`BlochState`."""
    return BlochState.from_array((rho_x, rho_y, rho_z))


def check_bloch(b: ArrayLike, slack: float = BALL_SLACK) -> NDArray[np.float64]:
    """Return ``b`` as a float array of shape ``(..., 3)`` inside the unit ball."""
    arr = np.asarray(b, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise StateError(f"Bloch vectors need a trailing axis of length 3, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StateError("Bloch vector has non-finite components")
    norm2 = np.einsum("...i,...i->...", arr, arr)
    if np.any(norm2 > (1.0 + slack) ** 2):
        raise StateError(f"Bloch vector outside the unit ball: |b| = {np.sqrt(norm2.max()):.15g}")
    return arr


def normalize_phase(phi: ArrayLike) -> Scalar:
    """Map angles into ``(-pi, pi]``."""
    phi = np.asarray(phi, dtype=float)
    wrapped = np.pi - np.mod(np.pi - phi, 2.0 * np.pi)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


@dataclass(frozen=True)
class SqueezedBathParams:
    """Broadband squeezed vacuum bath seen by the atom.

    Fields may be floats or mutually broadcastable arrays; array fields let a
    single right-hand-side call advance a batch of differently-parametrised
    states. Build instances with :func:`make_params` so that ``phi`` is
    wrapped and ``m`` is consistent with ``n_bar``.

    Attributes:
        n_bar: Mean photon number ``N >= 0``.
        phi: Squeezing phase in radians, in ``(-pi, pi]``.
        gamma: Vacuum decay rate, ``> 0``.
        m: Squeezing correlation strength ``sqrt(N (N + 1))``.
    """

    n_bar: Scalar
    phi: Scalar
    gamma: Scalar
    m: Scalar

    @property
    def squeeze_r(self) -> Scalar:
        """Squeezing magnitude ``r`` with ``N = sinh(r)**2``."""
        return np.arcsinh(np.sqrt(self.n_bar))

    def with_phi(self, phi: ArrayLike) -> "SqueezedBathParams":
        return make_params(self.n_bar, phi, self.gamma)


def make_params(n_bar: ArrayLike, phi: ArrayLike = 0.0, gamma: ArrayLike = 1.0) -> SqueezedBathParams:
    """Validate bath parameters and derive the correlation strength ``m``."""
    n = np.asarray(n_bar, dtype=float)
    g = np.asarray(gamma, dtype=float)
    ph = np.asarray(phi, dtype=float)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(g)) and np.all(np.isfinite(ph))):
        raise StateError("bath parameters must be finite")
    if np.any(n < 0):
        raise StateError(f"n_bar must be >= 0, got {n_bar!r}")
    if np.any(g <= 0):
        raise StateError(f"gamma must be > 0, got {gamma!r}")
    m = np.sqrt(n * (n + 1.0))

    def _out(a):
        return float(a) if np.ndim(a) == 0 else a

    return SqueezedBathParams(_out(n), normalize_phase(ph), _out(g), _out(m))


def bloch_to_density(b: ArrayLike) -> NDArray[np.complex128]:
    """Density matrix ``(1 + b . sigma) / 2``; batches map to ``(..., 2, 2)``."""
    arr = check_bloch(b)
    return 0.5 * (IDENTITY + np.einsum("...i,ijk->...jk", arr.astype(complex), PAULI))


def check_density(rho: ArrayLike, tol: float = BALL_SLACK) -> NDArray[np.complex128]:
    """Validate a single density matrix or a batch of them."""
    mat = np.asarray(rho, dtype=complex)
    if mat.shape[-2:] != (2, 2):
        raise StateError(f"density matrices must be 2x2, got {mat.shape}")
    if not np.allclose(mat, np.conj(np.swapaxes(mat, -1, -2)), rtol=0.0, atol=tol):
        raise StateError("density matrix is not Hermitian")
    trace = np.trace(mat, axis1=-2, axis2=-1)
    if np.any(np.abs(trace - 1.0) > tol):
        raise StateError(f"density matrix trace must be 1, got {trace}")
    if np.any(np.linalg.eigvalsh(mat) < -tol):
        raise StateError("density matrix has a negative eigenvalue")
    return mat


def pauli_components(mat: ArrayLike) -> NDArray[np.float64]:
    """Real coefficients ``tr(sigma_i A)`` for Hermitian ``A`` (no validation)."""
    mat = np.asarray(mat, dtype=complex)
    return np.einsum("ikj,...jk->...i", PAULI, mat).real


def density_to_bloch(rho: ArrayLike) -> NDArray[np.float64]:
    """Inverse of :func:`bloch_to_density`."""
    return pauli_components(check_density(rho))
