"""Shared vocabulary: multi-indices, points, Hermitian forms and tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import lapack

from .errors import DefinitenessError, ParameterError

# above this size factorial-type products go through lgamma
EXACT_PRODUCT_LIMIT = 20


class MultiIndex(tuple):
    """Ordered tuple of non-negative integers (alpha_1, ..., alpha_n)."""

    def __new__(cls, entries: Iterable[int]):
        entries = tuple(int(a) for a in entries)
        if not entries:
            raise ParameterError("a multi-index needs at least one entry")
        if any(a < 0 for a in entries):
            raise ParameterError(f"negative entry in multi-index {entries}")
        return super().__new__(cls, entries)

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def factorial(self) -> int:
        """Exact alpha! as a Python integer."""
        out = 1
        for a in self:
            out *= math.factorial(a)
        return out

    @property
    def log_factorial(self) -> float:
        return sum(math.lgamma(a + 1) for a in self)

    def power(self, z: np.ndarray) -> np.ndarray:
        """Evaluate the monomial z^alpha on points of shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape[:-1], dtype=complex)
        for j, a in enumerate(self):
            if a:
                out = out * z[..., j] ** a
        return out

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)})"


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate_cached(n: int, N: int) -> tuple[MultiIndex, ...]:
    return tuple(MultiIndex(c) for d in range(N + 1) for c in _compositions(d, n))


def enumerate_multiindices(n: int, N: int) -> list[MultiIndex]:
    """All multi-indices of length ``n`` with total degree at most ``N``.

    Ordered by total degree, then lexicographically with larger leading
    entries first: ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...``.
    """
    if n < 1 or N < 0:
        raise ParameterError(f"need n >= 1 and N >= 0, got n={n}, N={N}")
    return list(_enumerate_cached(int(n), int(N)))


def monomial_matrix(indices: Sequence[MultiIndex], z: np.ndarray) -> np.ndarray:
    """Columns z^alpha for each alpha in ``indices``; shape (..., len(indices))."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    top = max((max(a) for a in indices), default=0)
    # powers[k][..., j] = z_j ** k
    powers = [np.ones_like(z)]
    for _ in range(top):
        powers.append(powers[-1] * z)
    cols = []
    for alpha in indices:
        col = np.ones(z.shape[:-1], dtype=complex)
        for j in range(n):
            if alpha[j]:
                col = col * powers[alpha[j]][..., j]
        cols.append(col)
    return np.stack(cols, axis=-1)


def log_pochhammer(mu: float, m: int) -> float:
    """log of the rising factorial mu (mu+1) ... (mu+m-1); mu > 0."""
    if m < 0:
        raise ParameterError("m must be non-negative")
    if m == 0:
        return 0.0
    return math.lgamma(mu + m) - math.lgamma(mu)


def pochhammer(mu: float, m: int) -> float:
    """Rising factorial, multiplied out for small m and via lgamma otherwise."""
    if m <= EXACT_PRODUCT_LIMIT:
        out = 1.0
        for k in range(m):
            out *= mu + k
        return out
    return math.exp(log_pochhammer(mu, m))


def log_ball_constant(n: int) -> float:
    """log(n! / pi^n), the value of the ball kernel at the origin."""
    return math.lgamma(n + 1) - n * math.log(math.pi)


def as_points(z, n: int | None = None) -> np.ndarray:
    """Coerce to a complex array of shape (..., n) with finite entries."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if n is not None and z.shape[-1] != n:
        raise ParameterError(f"expected points in C^{n}, got trailing dimension {z.shape[-1]}")
    if not np.all(np.isfinite(z)):
        raise ParameterError("points must have finite coordinates")
    return z


def inner(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """<z, w> = sum_j z_j conj(w_j) over the last axis."""
    return np.sum(z * np.conj(w), axis=-1)


@dataclass(frozen=True)
class HermitianForm:
    """An n x n Hermitian matrix, optionally required to be positive-definite."""

    matrix: np.ndarray
    positive: bool = True

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError(f"Hermitian form must be square, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
            raise ParameterError("matrix is not conjugate-symmetric to 1e-12")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.positive:
            hermitian_sqrt(m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def quadratic(self, zeta: np.ndarray) -> np.ndarray:
        """zeta H zeta^* with zeta a row vector (batched over leading axes)."""
        zeta = np.asarray(zeta, dtype=complex)
        return np.real(np.einsum("...i,ij,...j->...", zeta, self.matrix, np.conj(zeta)))

    def sqrt(self) -> np.ndarray:
        return hermitian_sqrt(self.matrix)

    @property
    def det(self) -> float:
        return float(np.real(np.linalg.det(self.matrix)))


def hermitian_sqrt(H) -> np.ndarray:
    """Lower-triangular A with positive real diagonal such that H = A A^*.

    Raises
    ------
    DefinitenessError
        If H is not positive-definite; ``pivot`` names the failing pivot.
    """
    if isinstance(H, HermitianForm):
        H = H.matrix
    H = np.array(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {H.shape}")
    c, info = lapack.zpotrf(H, lower=1, clean=1)
    if info > 0:
        raise DefinitenessError(
            f"matrix is not positive-definite: pivot {info - 1} is non-positive", pivot=info - 1
        )
    if info < 0:
        raise ParameterError(f"invalid argument {-info} passed to zpotrf")
    return np.tril(c)


@dataclass(frozen=True)
class TolerancePolicy:
    """Absolute/relative tolerances per class of check."""

    closed_form: float = 1e-12
    finite_difference: float = 1e-6
    mc_sigmas: float = 3.0
    mc_relative: float = 0.01

    def __post_init__(self):
        for name in ("closed_form", "finite_difference", "mc_sigmas", "mc_relative"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"tolerance {name} must be strictly positive")

    def monte_carlo(self, stderr: float, value: float) -> float:
        return max(self.mc_sigmas * stderr, self.mc_relative * abs(value))


DEFAULT_TOLERANCES = TolerancePolicy()
