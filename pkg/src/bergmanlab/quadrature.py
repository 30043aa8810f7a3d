"""Integration engines for Lebesgue measure on domains in C^n.

Two engines are available. Quadrature rules are deterministic node/weight
sets; the ball and annulus rules are exact for the monomials z^a conj(z)^b up
to a stated degree. Monte Carlo draws uniform proposals from a bounding ball
and masks them with the domain's membership predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError, SamplingError


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (N, n) and positive weights (N,) for Lebesgue measure."""

    nodes: np.ndarray
    weights: np.ndarray
    engine: str = "quadrature"

    @property
    def n(self) -> int:
        return self.nodes.shape[-1]

    def __len__(self) -> int:
        return self.weights.shape[0]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Weighted sum over the leading (node) axis."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def restrict(self, mask: np.ndarray) -> "QuadratureRule":
        mask = np.asarray(mask, dtype=bool)
        return QuadratureRule(self.nodes[mask], self.weights[mask], self.engine)

    def affine(self, matrix: np.ndarray | None = None, shift=None, scale: float = 1.0) -> "QuadratureRule":
        """Push the rule forward under x -> scale * matrix @ x + shift."""
        nodes = self.nodes
        jac = scale ** (2 * self.n)
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=complex)
            nodes = nodes @ matrix.T
            jac *= abs(np.linalg.det(matrix)) ** 2
        nodes = scale * nodes
        if shift is not None:
            nodes = nodes + np.asarray(shift, dtype=complex)
        return QuadratureRule(nodes, self.weights * jac, self.engine)


def _gauss_legendre01(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


def _angles(m: int) -> tuple[np.ndarray, float]:
    # half-offset nodes keep every node off the real axis of each coordinate
    return 2.0 * np.pi * (np.arange(m) + 0.5) / m, 2.0 * np.pi / m


def _simplex_rule(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss-Legendre rule on {t >= 0, sum t < 1} in R^n."""
    u, wu = _gauss_legendre01(q)
    grids = np.meshgrid(*([u] * n), indexing="ij")
    wgrids = np.meshgrid(*([wu] * n), indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=-1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    t = np.empty_like(U)
    remaining = np.ones(U.shape[0])
    for j in range(n):
        t[:, j] = remaining * U[:, j]
        if j < n - 1:
            W = W * (1.0 - U[:, j]) ** (n - 1 - j)
        remaining = remaining * (1.0 - U[:, j])
    return t, W


def ball_rule(n: int, degree: int, radial_points: int | None = None) -> QuadratureRule:
    """Rule on the unit ball of C^n exact for z^a conj(z)^b, |a| + |b| <= degree.

    Uses z_j = sqrt(t_j) e^{i theta_j}: a collapsed Gauss-Legendre rule on the
    simplex for t and the trapezoid rule in each angle.
    """
    if n < 1 or degree < 0:
        raise ParameterError("need n >= 1 and degree >= 0")
    q = radial_points or (degree // 4 + n // 2 + 2)
    m = degree + 1
    t, wt = _simplex_rule(n, q)
    theta, wth = _angles(m)
    ang = np.stack([g.ravel() for g in np.meshgrid(*([theta] * n), indexing="ij")], axis=-1)
    nodes = np.sqrt(t)[:, None, :] * np.exp(1j * ang)[None, :, :]
    weights = np.repeat(wt, ang.shape[0]) * (0.5 * wth) ** n
    return QuadratureRule(nodes.reshape(-1, n), weights)


def annulus_rule(r_inner: float, degree: int, radial_points: int | None = None) -> QuadratureRule:
    """Rule on {r_inner < |z| < 1} in C: Gauss-Legendre in |z|^2, trapezoid in angle."""
    if not 0.0 <= r_inner < 1.0:
        raise ParameterError("inner radius must lie in [0, 1)")
    q = radial_points or (degree // 2 + 40)
    x, w = _gauss_legendre01(q)
    t = r_inner**2 + (1.0 - r_inner**2) * x
    wt = (1.0 - r_inner**2) * w
    theta, wth = _angles(degree + 1)
    nodes = np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]
    weights = np.repeat(0.5 * wt * wth, theta.size)
    return QuadratureRule(nodes.reshape(-1, 1), weights)


def box_rule(center, half_width: float, points_per_axis: int, contains: Callable | None = None) -> QuadratureRule:
    """Product Gauss-Legendre rule on a box in R^{2n}, masked by ``contains``.

    Only first-order accurate across a curved boundary; used as the generic
    fallback for domains without a dedicated rule.
    """
    center = np.asarray(center, dtype=complex)
    n = center.size
    x, w = np.polynomial.legendre.leggauss(points_per_axis)
    x = half_width * x
    w = half_width * w
    axes = np.meshgrid(*([x] * (2 * n)), indexing="ij")
    waxes = np.meshgrid(*([w] * (2 * n)), indexing="ij")
    real = np.stack([a.ravel() for a in axes], axis=-1)
    weights = np.prod(np.stack([a.ravel() for a in waxes], axis=-1), axis=-1)
    nodes = real[:, :n] + 1j * real[:, n:] + center
    rule = QuadratureRule(nodes, weights, engine="box-quadrature")
    if contains is not None:
        rule = rule.restrict(contains(nodes))
    return rule


@dataclass(frozen=True)
class IntegralEstimate:
    value: complex | np.ndarray
    stderr: float | np.ndarray
    engine: str
    samples: int = 0


def uniform_ball_points(rng: np.random.Generator, count: int, n: int, center, radius: float) -> np.ndarray:
    """Uniform points in the Euclidean ball of C^n = R^{2n}."""
    g = rng.standard_normal((count, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / (2 * n))
    x = g * r[:, None]
    return x[:, :n] + 1j * x[:, n:] + np.asarray(center, dtype=complex)


def ball_volume(n: int, radius: float = 1.0) -> float:
    return math.pi**n * radius ** (2 * n) / math.factorial(n)


def monte_carlo(domain, f: Callable[[np.ndarray], np.ndarray], samples: int, seed: int,
                batch: int = 250_000) -> IntegralEstimate:
    """Estimate the integral of f over ``domain`` from uniform bounding-ball proposals.

    ``f`` maps points (N, n) to values (N,) or (N, k). The returned stderr of a
    complex value is sqrt(Var Re + Var Im) / sqrt(N) times the proposal volume.
    """
    if samples < 1:
        raise ParameterError("need at least one sample")
    rng = np.random.default_rng(seed)
    vol = ball_volume(domain.n, domain.radius)
    s1 = None
    s2 = None
    accepted = 0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        pts = uniform_ball_points(rng, m, domain.n, domain.center, domain.radius)
        mask = domain.contains(pts)
        vals = np.zeros((m,) + _value_shape(f, pts[:1]), dtype=complex)
        if mask.any():
            vals[mask] = f(pts[mask])
        accepted += int(mask.sum())
        part1 = vals.sum(axis=0)
        part2 = (np.abs(vals) ** 2).sum(axis=0)
        s1 = part1 if s1 is None else s1 + part1
        s2 = part2 if s2 is None else s2 + part2
        done += m
    if accepted == 0:
        raise SamplingError(f"no proposals accepted by domain {domain.name!r} out of {samples}")
    mean = s1 / samples
    var = np.maximum(s2 / samples - np.abs(mean) ** 2, 0.0) * samples / max(samples - 1, 1)
    value = vol * mean
    stderr = vol * np.sqrt(var / samples)
    if np.ndim(value) == 0:
        value, stderr = complex(value), float(stderr)
    return IntegralEstimate(value, stderr, "monte-carlo", samples)


def _value_shape(f, probe):
    return np.shape(f(probe))[1:]


def quadrature(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray]) -> IntegralEstimate:
    vals = np.asarray(f(rule.nodes), dtype=complex)
    value = rule.integrate(vals)
    zero = np.zeros(np.shape(value))
    if np.ndim(value) == 0:
        return IntegralEstimate(complex(value), 0.0, rule.engine, len(rule))
    return IntegralEstimate(value, zero, rule.engine, len(rule))
