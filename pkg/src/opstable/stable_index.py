"""The stable exponent matrix: regimes, matrix powers and Jurek coordinates.

Three regimes are supported: pure scaling (a multiple of the identity),
scaling with rotation (2-D, complex-conjugate spiral), and a generic
diagonalizable exponent given by its spectral data.  All operations are pure
functions over an immutable index, safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    ModelValidationError,
    NonConvergenceError,
    UnsupportedRegimeError,
)

_UNITARY_TOL = 1e-12
_DISTINCT_TOL = 1e-9


class Regime(str, enum.Enum):
    PURE_SCALING = "pure_scaling"
    SCALING_ROTATION = "scaling_rotation"
    GENERIC = "generic"


def _rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class StableIndex:
    """Scaling exponent of an operator-stable law.

    Pure scaling: E = (D*mu)^-1 * I with 0 < D*mu <= 2.
    Scaling & rotation: D = 2, diagonal (2*mu)^-1, off-diagonal -/+ rotation_rate.
    Generic: E^T = O diag(lambda) O^dagger with unitary O and pairwise distinct
    eigenvalues (real or conjugate pairs) whose real parts are positive.
    """

    regime: Regime
    dimension: int
    mu: float | None = None
    rotation_rate: float | None = None
    eigenvalues: tuple[complex, ...] | None = None
    eigenbasis: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def pure_scaling(cls, dimension: int, mu: float) -> "StableIndex":
        return cls(Regime.PURE_SCALING, dimension, mu=mu)

    @classmethod
    def scaling_rotation(cls, mu: float, rotation_rate: float) -> "StableIndex":
        return cls(Regime.SCALING_ROTATION, 2, mu=mu, rotation_rate=rotation_rate)

    @classmethod
    def generic(cls, eigenvalues, eigenbasis) -> "StableIndex":
        eigenvalues = tuple(complex(ev) for ev in eigenvalues)
        basis = np.asarray(eigenbasis, dtype=complex)
        return cls(Regime.GENERIC, len(eigenvalues),
                   eigenvalues=eigenvalues, eigenbasis=basis)

    def __post_init__(self):
        if self.dimension < 1:
            raise ModelValidationError("dimension must be a positive integer")
        if self.regime is Regime.PURE_SCALING:
            self._validate_pure()
        elif self.regime is Regime.SCALING_ROTATION:
            self._validate_rotation()
        else:
            self._validate_generic()

    def _validate_pure(self):
        if self.mu is None or self.mu <= 0:
            raise ModelValidationError("pure scaling requires mu > 0")
        if not 0 < self.dimension * self.mu <= 2:
            raise ModelValidationError(
                f"stability exponent D*mu = {self.dimension * self.mu} violates 0 < D*mu <= 2"
            )

    def _validate_rotation(self):
        if self.dimension != 2:
            raise ModelValidationError("scaling & rotation is defined in dimension 2")
        if self.mu is None or not 0 < 2 * self.mu <= 2:
            raise ModelValidationError(
                "scaling & rotation requires 0 < 2*mu <= 2"
            )
        if self.rotation_rate is None or not np.isfinite(self.rotation_rate):
            raise ModelValidationError("rotation rate must be a finite real number")

    def _validate_generic(self):
        evs, basis = self.eigenvalues, self.eigenbasis
        if evs is None or basis is None:
            raise ModelValidationError("generic regime needs eigenvalues and eigenbasis")
        d = self.dimension
        if basis.shape != (d, d):
            raise ModelValidationError("eigenbasis must be a D x D matrix")
        for i in range(d):
            for j in range(i + 1, d):
                if abs(evs[i] - evs[j]) < _DISTINCT_TOL:
                    raise UnsupportedRegimeError(
                        "repeated eigenvalues are not supported (Jordan blocks rejected)"
                    )
        if min(ev.real for ev in evs) <= 0:
            raise ModelValidationError("all eigenvalue real parts must be positive")
        gram = basis @ basis.conj().T
        if np.max(np.abs(gram - np.eye(d))) > _UNITARY_TOL:
            raise ModelValidationError("eigenbasis is not unitary to 1e-12")
        exponent = (basis * np.asarray(evs)) @ basis.conj().T
        if np.max(np.abs(exponent.imag)) > _UNITARY_TOL:
            raise ModelValidationError(
                "eigen-data is not conjugate-symmetric: E^T has an imaginary part"
            )

    @property
    def scaling_exponent(self) -> float:
        """Radial exponent rho with r_k = |k|^rho (pure scaling / rotation only)."""
        if self.regime is Regime.PURE_SCALING:
            return self.dimension * self.mu
        if self.regime is Regime.SCALING_ROTATION:
            return 2 * self.mu
        raise UnsupportedRegimeError("generic regime has no single radial exponent")

    def transpose_exponent(self) -> np.ndarray:
        """E^T as a real matrix."""
        if self.regime is Regime.PURE_SCALING:
            return np.eye(self.dimension) / (self.dimension * self.mu)
        if self.regime is Regime.SCALING_ROTATION:
            g = 1.0 / (2 * self.mu)
            b = self.rotation_rate
            return np.array([[g, b], [-b, g]])
        mat = (self.eigenbasis * np.asarray(self.eigenvalues)) @ self.eigenbasis.conj().T
        return mat.real


def matrix_power(index: StableIndex, r: float) -> np.ndarray:
    """The operator r^{E^T} as a real D x D matrix, for r > 0."""
    if not r > 0:
        raise DomainError("matrix power requires r > 0")
    if index.regime is Regime.PURE_SCALING:
        return r ** (1.0 / (index.dimension * index.mu)) * np.eye(index.dimension)
    if index.regime is Regime.SCALING_ROTATION:
        radial = r ** (1.0 / (2 * index.mu))
        return radial * _rotation(-index.rotation_rate * np.log(r))
    lam = np.asarray(index.eigenvalues)
    diag = np.exp(lam * np.log(r))
    out = (index.eigenbasis * diag) @ index.eigenbasis.conj().T
    scale = max(1.0, float(np.max(np.abs(out))))
    if np.max(np.abs(out.imag)) > 1e-12 * scale:
        raise NonConvergenceError("conjugate-pair cancellation failed in matrix power")
    return out.real


def _generic_log_radius(index: StableIndex, k: np.ndarray) -> float:
    """Solve |r^{-E^T} k| = 1 for log r by bisection plus Newton polish."""
    k_tilde = index.eigenbasis.conj().T @ k.astype(complex)
    weights = np.abs(k_tilde) ** 2
    thetas = np.array([ev.real for ev in index.eigenvalues])

    def g(x: float) -> float:
        # log |r^{-E^T} k|^2 evaluated stably at x = log r
        expo = np.log(weights[weights > 0]) - 2 * thetas[weights > 0] * x
        m = np.max(expo)
        return m + np.log(np.sum(np.exp(expo - m)))

    lo, hi = -50.0, 50.0
    if g(lo) < 0 or g(hi) > 0:
        raise DomainError("vector is too extreme for the Jurek radius bracket")
    x = 0.0
    for _ in range(200):
        x = 0.5 * (lo + hi)
        if g(x) > 0:
            lo = x
        else:
            hi = x
        if hi - lo < 1e-14:
            break
    else:
        raise NonConvergenceError("Jurek radius bisection did not converge in 200 iterations")
    # Newton polish on g(x) = 0; g is strictly decreasing since all thetas > 0
    for _ in range(6):
        w = np.exp(np.log(weights[weights > 0]) - 2 * thetas[weights > 0] * x)
        deriv = -2.0 * float(np.sum(thetas[weights > 0] * w) / np.sum(w))
        step = g(x) / deriv
        x -= step
        if abs(step) < 1e-15:
            break
    return x


def jurek_decompose(index: StableIndex, k) -> tuple[float, np.ndarray]:
    """Polar-like coordinates k = radius^{E^T} angle with |angle| = 1."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (index.dimension,):
        raise DomainError(f"vector must have dimension {index.dimension}")
    norm = float(np.linalg.norm(k))
    if norm == 0.0:
        raise DomainError("the zero vector has no Jurek coordinates")

    if index.regime is Regime.PURE_SCALING:
        return norm ** (index.dimension * index.mu), k / norm
    if index.regime is Regime.SCALING_ROTATION:
        radius = norm ** (2 * index.mu)
        angle = _rotation(2 * index.rotation_rate * index.mu * np.log(norm)) @ (k / norm)
        return radius, angle

    x = _generic_log_radius(index, k)
    radius = float(np.exp(x))
    lam = np.asarray(index.eigenvalues)
    diag = np.exp(-lam * x)
    angle = (index.eigenbasis * diag) @ (index.eigenbasis.conj().T @ k.astype(complex))
    return radius, angle.real
