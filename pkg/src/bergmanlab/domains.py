"""Bounded domains in C^n: membership, seeded sampling and quadrature.

Built-ins cover the unit ball and its translates/dilates, the slit balls
(complex hyperplane {z_n = 0} removed), the quartic domains obtained from the
slit balls by (z', z_n) -> (z' z_n, z_n), the Hartogs-removable real set,
complex ellipsoids and the planar annulus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import HermitianForm, as_points, hermitian_sqrt
from .errors import ParameterError
from .quadrature import (
    IntegralEstimate,
    QuadratureRule,
    annulus_rule,
    ball_rule,
    box_rule,
    monte_carlo,
    quadrature,
    uniform_ball_points,
)


@dataclass(frozen=True)
class DomainDescriptor:
    """A bounded domain with a bounding ball ``|z - center| < radius``.

    ``rule`` maps a polynomial degree to a quadrature rule whose nodes all lie
    in the domain; ``boundary_distance`` returns a lower estimate of the
    distance from points to the complement (used to size derivative stencils).
    """

    name: str
    n: int
    contains: Callable[[np.ndarray], np.ndarray]
    radius: float
    center: np.ndarray = field(default=None)
    boundary_distance: Callable[[np.ndarray], np.ndarray] | None = None
    rule: Callable[[int], QuadratureRule] | None = None
    volume: float | None = None

    def __post_init__(self):
        c = np.zeros(self.n, dtype=complex) if self.center is None else np.asarray(self.center, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    @property
    def bounding_radius(self) -> float:
        """R with |z| < R for every member z."""
        return float(np.linalg.norm(self.center) + self.radius)

    def __contains__(self, z) -> bool:
        return bool(np.all(self.contains(as_points(z, self.n))))

    def sample(self, count: int, seed: int, batch: int = 65536) -> np.ndarray:
        """``count`` i.i.d. uniform points of the domain, deterministic in ``seed``."""
        rng = np.random.default_rng(seed)
        out = []
        have = 0
        tries = 0
        while have < count:
            pts = uniform_ball_points(rng, batch, self.n, self.center, self.radius)
            pts = pts[self.contains(pts)]
            out.append(pts)
            have += pts.shape[0]
            tries += 1
            if tries > 1000 and have == 0:
                raise ParameterError(f"domain {self.name!r} rejected every proposal")
        return np.concatenate(out)[:count]

    def quadrature(self, degree: int) -> QuadratureRule:
        if self.rule is not None:
            rule = self.rule(degree)
        else:
            rule = box_rule(self.center, self.radius, max(8, degree + 2), None)
        return rule.restrict(self.contains(rule.nodes))

    def integrate(self, f, engine: str = "quadrature", degree: int = 16,
                  samples: int = 100_000, seed: int = 0) -> IntegralEstimate:
        if engine == "quadrature":
            return quadrature(self.quadrature(degree), f)
        if engine in ("mc", "monte-carlo"):
            return monte_carlo(self, f, samples, seed)
        raise ParameterError(f"unknown integration engine {engine!r}")


def _norm2(z):
    return np.sum(np.abs(z) ** 2, axis=-1)


def ball(n: int, center=None, radius: float = 1.0) -> DomainDescriptor:
    """The Euclidean ball B^n(center, radius)."""
    from .quadrature import ball_volume

    c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    if radius <= 0:
        raise ParameterError("radius must be positive")

    def contains(z):
        return _norm2(np.asarray(z) - c) < radius**2

    def dist(z):
        return radius - np.sqrt(_norm2(np.asarray(z) - c))

    name = "ball" if center is None and radius == 1.0 else f"ball(r={radius:g})"
    return DomainDescriptor(
        name=name, n=n, contains=contains, radius=radius, center=c,
        boundary_distance=dist,
        rule=lambda d: ball_rule(n, d).affine(scale=radius, shift=c),
        volume=ball_volume(n, radius),
    )


def unit_ball(n: int) -> DomainDescriptor:
    return ball(n)


def slit_ball(n: int = 2) -> DomainDescriptor:
    """B^n minus the complex hyperplane {z_n = 0}; n = 2 gives D_1."""
    if n < 2:
        raise ParameterError("the slit ball needs n >= 2")
    base = ball(n)

    def contains(z):
        z = np.asarray(z)
        return base.contains(z) & (z[..., -1] != 0)

    def dist(z):
        z = np.asarray(z)
        return np.minimum(base.boundary_distance(z), np.abs(z[..., -1]))

    return DomainDescriptor(
        name="D1" if n == 2 else f"W1(n={n})", n=n, contains=contains, radius=1.0,
        boundary_distance=dist, rule=base.rule, volume=base.volume,
    )


def quartic_domain(n: int = 2) -> DomainDescriptor:
    """{ |z'|^2 + |z_n|^2 (|z_n|^2 - 1) < 0 }; the image of the slit ball under
    (z', z_n) -> (z' z_n, z_n). n = 2 gives D_2."""
    if n < 2:
        raise ParameterError("the quartic domain needs n >= 2")

    def contains(w):
        w = np.asarray(w)
        wn2 = np.abs(w[..., -1]) ** 2
        return _norm2(w[..., :-1]) + wn2 * (wn2 - 1.0) < 0

    def to_slit(w):
        w = np.asarray(w)
        return np.concatenate([w[..., :-1] / w[..., -1:], w[..., -1:]], axis=-1)

    def dist(w):
        # stencil-sizing heuristic: source-side distance scaled by |w_n|
        w = np.asarray(w)
        z = to_slit(w)
        d_src = np.minimum(1.0 - np.sqrt(_norm2(z)), np.abs(z[..., -1]))
        return 0.5 * d_src * np.abs(w[..., -1])

    def rule(d):
        # push the ball rule forward; |det J|^2 = |z_n|^{2(n-1)}
        src = ball_rule(n, 2 * d + 2 * (n - 1))
        z = src.nodes
        w = np.concatenate([z[:, :-1] * z[:, -1:], z[:, -1:]], axis=-1)
        return QuadratureRule(w, src.weights * np.abs(z[:, -1]) ** (2 * (n - 1)))

    return DomainDescriptor(
        name="D2" if n == 2 else f"W2(n={n})", n=n, contains=contains, radius=1.0,
        boundary_distance=dist, rule=rule,
    )


def hartogs_removed_ball(n: int = 2, eps: float = 0.01) -> DomainDescriptor:
    """B^n minus E = { |z'|^2 + (Re z_n)^2 <= eps, Im z_n = 0 }."""
    if n < 2:
        raise ParameterError("the Hartogs example needs n >= 2")
    base = ball(n)

    def in_removed(z):
        z = np.asarray(z)
        zn = z[..., -1]
        return (zn.imag == 0) & (_norm2(z[..., :-1]) + zn.real**2 <= eps)

    def contains(z):
        return base.contains(z) & ~in_removed(z)

    def dist(z):
        z = np.asarray(z)
        zn = z[..., -1]
        # distance to E is at least |Im z_n| and at least the gap to the solid tube
        gap = np.sqrt(_norm2(z[..., :-1]) + zn.real**2) - np.sqrt(eps)
        d_e = np.maximum(np.abs(zn.imag), gap)
        return np.minimum(base.boundary_distance(z), d_e)

    return DomainDescriptor(
        name=f"ball-minus-hartogs(eps={eps:g})", n=n, contains=contains, radius=1.0,
        boundary_distance=dist, rule=base.rule, volume=base.volume,
    )


def ellipsoid(H) -> DomainDescriptor:
    """E_H = { zeta : zeta H zeta^* < n + 1 } for positive-definite H."""
    form = H if isinstance(H, HermitianForm) else HermitianForm(H)
    n = form.n
    A = hermitian_sqrt(form.matrix)
    lam_min = float(np.min(np.linalg.eigvalsh(form.matrix)))
    radius = float(np.sqrt((n + 1) / lam_min))

    def contains(z):
        return form.quadratic(z) < n + 1

    def dist(z):
        # the ball |zeta| < sqrt((n+1)/lambda_max) sits inside; scale by the form
        lam_max = float(np.max(np.linalg.eigvalsh(form.matrix)))
        q = np.sqrt(np.maximum(form.quadratic(z), 0.0))
        return (np.sqrt(n + 1) - q) / np.sqrt(lam_max)

    # zeta = sqrt(n+1) * x A^{-1} (row vectors) maps the unit ball onto E_H
    Ainv_T = np.linalg.inv(A).T

    def rule(d):
        return ball_rule(n, d).affine(matrix=Ainv_T, scale=np.sqrt(n + 1))

    from .quadrature import ball_volume

    return DomainDescriptor(
        name="ellipsoid", n=n, contains=contains, radius=radius,
        boundary_distance=dist, rule=rule,
        volume=ball_volume(n) * (n + 1) ** n / form.det,
    )


def annulus(r: float) -> DomainDescriptor:
    """{ r < |z| < 1 } in C."""
    if not 0.0 < r < 1.0:
        raise ParameterError("inner radius must lie in (0, 1)")

    def contains(z):
        a = np.abs(np.asarray(z)[..., 0])
        return (a > r) & (a < 1.0)

    def dist(z):
        a = np.abs(np.asarray(z)[..., 0])
        return np.minimum(a - r, 1.0 - a)

    return DomainDescriptor(
        name=f"annulus(r={r:g})", n=1, contains=contains, radius=1.0,
        boundary_distance=dist, rule=lambda d: annulus_rule(r, d),
        volume=np.pi * (1.0 - r**2),
    )


def unitary_image(domain: DomainDescriptor, U) -> DomainDescriptor:
    """U(domain) for a unitary matrix U acting on column vectors."""
    U = np.asarray(U, dtype=complex)
    Uh = U.conj().T

    def back(z):
        return np.asarray(z) @ Uh.T

    def contains(z):
        return domain.contains(back(z))

    dist = None
    if domain.boundary_distance is not None:
        def dist(z):
            return domain.boundary_distance(back(z))

    rule = None
    if domain.rule is not None:
        def rule(d):
            return domain.rule(d).affine(matrix=U)

    return DomainDescriptor(
        name=f"U({domain.name})", n=domain.n, contains=contains, radius=domain.radius,
        center=U @ domain.center, boundary_distance=dist, rule=rule, volume=domain.volume,
    )


BUILTIN_DOMAINS = {
    "ball": lambda n=1, **kw: ball(n, radius=kw.get("radius", 1.0)),
    "scaled-ball": lambda n=1, **kw: ball(n, radius=kw.get("radius", 0.8)),
    "slit": lambda n=2, **kw: slit_ball(n),
    "d2": lambda n=2, **kw: quartic_domain(n),
    "hartogs": lambda n=2, **kw: hartogs_removed_ball(n, kw.get("eps", 0.01)),
    "annulus": lambda n=1, **kw: annulus(kw.get("r", 0.5)),
}


def builtin_domain(name: str, n: int, **params) -> DomainDescriptor:
    try:
        factory = BUILTIN_DOMAINS[name]
    except KeyError:
        raise ParameterError(f"unknown domain {name!r}; choose from {sorted(BUILTIN_DOMAINS)}") from None
    return factory(n, **params)
