"""Moment data of powered ball kernels and the even-moment diagnostics.

For K = phi(z) conj(phi(w)) K_ball(z, w)^lam the monomials c_{alpha,lam} w^alpha phi
are orthonormal, which pins every moment of the measure |phi|^2 dm:
int w^alpha conj(w)^beta |phi|^2 dm = delta_{alpha beta} / c_{alpha,lam}^2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import MultiIndex, enumerate_multiindices, log_ball_constant, log_pochhammer, monomial_matrix
from .domains import DomainDescriptor
from .errors import ParameterError, SamplingError
from .quadrature import monte_carlo, quadrature


def log_c_alpha_sq(alpha, lam: float, n: int | None = None) -> float:
    """log of c_{alpha,lam}^2 = (n!/pi^n)^lam * mu...(mu+|alpha|-1) / alpha!."""
    alpha = MultiIndex(alpha)
    n = len(alpha) if n is None else n
    if lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    mu = (n + 1) * lam
    return lam * log_ball_constant(n) + log_pochhammer(mu, alpha.order) - alpha.log_factorial


def c_alpha(alpha, lam: float, n: int | None = None) -> float:
    """Normalising constant of the orthonormal monomial basis."""
    alpha = MultiIndex(alpha)
    n = len(alpha) if n is None else n
    if lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    if alpha.order <= 20:
        mu = (n + 1) * lam
        prod = 1.0
        for k in range(alpha.order):
            prod *= mu + k
        base = (math.factorial(n) / math.pi**n) ** lam
        return math.sqrt(base * prod / alpha.factorial)
    return math.exp(0.5 * log_c_alpha_sq(alpha, lam, n))


def moment_target(alpha, beta, lam: float) -> float:
    """delta_{alpha beta} / c_{alpha,lam}^2."""
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    if alpha != beta:
        return 0.0
    return math.exp(-log_c_alpha_sq(alpha, lam))


def powered_ball_density(n: int, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    """Density rho on the unit ball with int w^a conj(w)^b rho dm = delta / c^2_{a,lam}.

    rho = (pi^n/n!)^lam Gamma(mu) / (pi^n Gamma(mu - n)) (1 - |w|^2)^(mu - n - 1),
    mu = (n+1) lam; requires mu > n. lam = 1 gives rho = 1.
    """
    mu = (n + 1) * lam
    if mu <= n:
        raise ParameterError(f"need (n+1)*lam > n for a finite density, got lam={lam}")
    log_const = -lam * log_ball_constant(n) + math.lgamma(mu) - n * math.log(math.pi) - math.lgamma(mu - n)
    const = math.exp(log_const)
    power = mu - n - 1

    def rho(w):
        s = 1.0 - np.sum(np.abs(np.asarray(w)) ** 2, axis=-1)
        if power == 0:
            return np.full(s.shape, const)
        return const * np.clip(s, 0.0, None) ** power

    return rho


@dataclass(frozen=True)
class MomentMeasure:
    """|phi|^2 chi_Omega dm realised by an integration engine.

    ``density`` defaults to 1. ``engine`` is "quadrature" or "mc".
    """

    domain: DomainDescriptor
    density: Callable[[np.ndarray], np.ndarray] | None = None
    engine: str = "quadrature"
    samples: int = 200_000
    seed: int = 0
    degree: int | None = None

    def weight(self, w):
        if self.density is None:
            return np.ones(np.shape(w)[:-1])
        d = np.asarray(self.density(w), dtype=float)
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ParameterError("moment density must be finite and non-negative")
        return d

    def integrate(self, f, degree: int = 16):
        if self.engine == "quadrature":
            rule = self.domain.quadrature(self.degree or degree)
            return quadrature(rule, lambda w: _times(f(w), self.weight(w)))
        if self.engine in ("mc", "monte-carlo"):
            return monte_carlo(self.domain, lambda w: _times(f(w), self.weight(w)), self.samples, self.seed)
        raise ParameterError(f"unknown engine {self.engine!r}")


def _times(values, weight):
    values = np.asarray(values)
    if values.ndim == weight.ndim:
        return values * weight
    return values * weight.reshape(weight.shape + (1,) * (values.ndim - weight.ndim))


@dataclass
class MomentTable:
    """(alpha, beta) -> estimate of int w^alpha conj(w)^beta d eta, with stderr."""

    indices: list
    values: np.ndarray
    stderr: np.ndarray
    engine: str
    meta: dict = field(default_factory=dict)

    def entry(self, alpha, beta):
        i = self.indices.index(MultiIndex(alpha))
        j = self.indices.index(MultiIndex(beta))
        return complex(self.values[i, j]), float(self.stderr[i, j])

    def hermitian_defect(self) -> float:
        """max |s_ab - conj(s_ba)| / (stderr_ab + stderr_ba + tiny)."""
        diff = np.abs(self.values - self.values.conj().T)
        scale = self.stderr + self.stderr.T + 1e-13 * (1.0 + np.abs(self.values))
        return float(np.max(diff / scale))

    def rows(self):
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                v = self.values[i, j]
                yield tuple(a), tuple(b), float(v.real), float(v.imag), float(self.stderr[i, j]), self.engine

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "re", "im", "stderr", "engine"])
        for a, b, re, im, se, eng in self.rows():
            w.writerow([_fmt_index(a), _fmt_index(b), f"{re:.17g}", f"{im:.17g}", f"{se:.17g}", eng])
        return buf.getvalue()

    def to_dict(self) -> dict:
        from .reporting import SCHEMA_VERSION

        return {
            "schema": SCHEMA_VERSION,
            "engine": self.engine,
            "meta": self.meta,
            "entries": [
                {"alpha": list(a), "beta": list(b), "re": re, "im": im, "stderr": se}
                for a, b, re, im, se, _ in self.rows()
            ],
        }

    def to_json(self) -> str:
        from .reporting import dumps

        return dumps(self.to_dict())


def _fmt_index(a) -> str:
    return "(" + ",".join(str(x) for x in a) + ")"


def moment_table(measure: MomentMeasure, max_degree: int = 4) -> MomentTable:
    """All moments with |alpha|, |beta| <= max_degree from one pass of the engine."""
    n = measure.domain.n
    idx = enumerate_multiindices(n, max_degree)
    m = len(idx)

    if measure.engine == "quadrature":
        rule = measure.domain.quadrature(measure.degree or (2 * max_degree + 2))
        if len(rule) == 0:
            raise SamplingError(f"quadrature rule for {measure.domain.name!r} has no nodes")
        F = monomial_matrix(idx, rule.nodes)
        wts = rule.weights * measure.weight(rule.nodes)
        vals = (F * wts[:, None]).T @ F.conj()
        se = np.zeros((m, m))
        engine = rule.engine
    elif measure.engine in ("mc", "monte-carlo"):
        vals, se = _mc_moments(measure, idx)
        engine = "monte-carlo"
    else:
        raise ParameterError(f"unknown engine {measure.engine!r}")
    return MomentTable(list(idx), vals, se, engine, {"domain": measure.domain.name, "max_degree": max_degree})


def _mc_moments(measure: MomentMeasure, idx, batch: int = 200_000):
    from .quadrature import ball_volume, uniform_ball_points

    dom = measure.domain
    rng = np.random.default_rng(measure.seed)
    vol = ball_volume(dom.n, dom.radius)
    m = len(idx)
    s1 = np.zeros((m, m), dtype=complex)
    s2 = np.zeros((m, m))
    total = measure.samples
    done = 0
    accepted = 0
    while done < total:
        k = min(batch, total - done)
        pts = uniform_ball_points(rng, k, dom.n, dom.center, dom.radius)
        pts = pts[dom.contains(pts)]
        accepted += pts.shape[0]
        if pts.shape[0]:
            F = monomial_matrix(idx, pts)
            wt = measure.weight(pts)
            s1 += (F * wt[:, None]).T @ F.conj()
            # |w^a conj(w)^b|^2 = |w^a|^2 |w^b|^2
            A = np.abs(F) ** 2 * (wt**2)[:, None]
            s2 += A.T @ np.abs(F) ** 2
        done += k
    if accepted == 0:
        raise SamplingError(f"no Monte Carlo proposals landed in {dom.name!r}")
    mean = s1 / total
    var = np.maximum(s2 / total - np.abs(mean) ** 2, 0.0) * total / (total - 1)
    return vol * mean, vol * np.sqrt(var / total)


def moment_integral(measure: MomentMeasure, alpha, beta):
    """Estimate of int w^alpha conj(w)^beta d eta as (value, stderr)."""
    alpha, beta = MultiIndex(alpha), MultiIndex(beta)
    est = measure.integrate(lambda w: alpha.power(w) * np.conj(beta.power(w)),
                            degree=alpha.order + beta.order + 2)
    return complex(est.value), float(est.stderr)


@dataclass(frozen=True)
class MomentResidual:
    worst_sigma: float
    worst_relative_diagonal: float
    worst_offdiagonal: float
    worst_cell: tuple
    table: MomentTable


def moment_identity_residual(measure: MomentMeasure, lam: float, max_degree: int = 4) -> MomentResidual:
    """Compare a moment table with delta_{alpha beta} / c^2_{alpha,lam}.

    ``worst_sigma`` is max |estimate - target| / stderr over all cells (stderr
    floored at 1e-13 (1 + |target|) for deterministic engines). Diagonal cells
    are also summarised relatively, off-diagonal cells absolutely.
    """
    table = moment_table(measure, max_degree)
    m = len(table.indices)
    target = np.zeros((m, m))
    for i, a in enumerate(table.indices):
        target[i, i] = moment_target(a, a, lam)
    err = np.abs(table.values - target)
    floor = 1e-13 * (1.0 + np.abs(target))
    sig = err / np.maximum(table.stderr, floor)
    k = int(np.argmax(sig))
    i, j = divmod(k, m)
    diag = np.diag(err) / np.diag(target)
    off = err.copy()
    np.fill_diagonal(off, 0.0)
    return MomentResidual(
        worst_sigma=float(sig[i, j]),
        worst_relative_diagonal=float(np.max(diag)),
        worst_offdiagonal=float(np.max(off)),
        worst_cell=(tuple(table.indices[i]), tuple(table.indices[j])),
        table=table,
    )


def even_moment_closed_form(m: int, lam: float, n: int) -> float:
    """int Re(z_1)^{2m} d eta = (pi^n/n!)^lam 2^{-2m} (2m)! / (m! mu...(mu+m-1))."""
    return math.exp(log_even_moment(m, lam, n))


def log_even_moment(m: int, lam: float, n: int) -> float:
    if m < 1:
        raise ParameterError("m must be a positive integer")
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    mu = (n + 1) * lam
    return (-lam * log_ball_constant(n) - 2 * m * math.log(2.0) + math.lgamma(2 * m + 1)
            - math.lgamma(m + 1) - log_pochhammer(mu, m))


def stirling_ratio_sequence(mu: float, m_max: int) -> np.ndarray:
    """(m / (mu + m))^m for m = 1..m_max; decreases to exp(-mu)."""
    if m_max < 1:
        raise ParameterError("m_max must be at least 1")
    m = np.arange(1, m_max + 1, dtype=float)
    return np.exp(-m * np.log1p(mu / m))


def support_reach_estimate(measure: MomentMeasure | None, m_max: int, *, lam: float | None = None,
                           n: int | None = None) -> float:
    """(int Re(z_1)^{2m} d eta / eta(C^n))^{1/(2m)} at m = m_max.

    The root test value approaches sup |Re z_1| over the support. Pass
    ``measure=None`` with ``lam`` and ``n`` to use the closed-form moments of
    the powered ball measure; a point mass at the origin is represented by a
    measure whose domain is ``None``.
    """
    if m_max < 1:
        raise ParameterError("m_max must be at least 1")
    if measure is None:
        if lam is None or n is None:
            raise ParameterError("closed-form support reach needs lam and n")
        log_mass = -lam * log_ball_constant(n)
        return math.exp((log_even_moment(m_max, lam, n) - log_mass) / (2 * m_max))
    if measure.domain is None:
        return 0.0
    deg = 2 * m_max
    est = measure.integrate(lambda w: np.stack([np.ones(w.shape[0]), np.real(w[:, 0]) ** deg], axis=-1),
                            degree=deg + 2)
    mass, top = np.real(est.value)
    se = np.atleast_1d(est.stderr)
    if top <= 0 or mass <= 0:
        raise SamplingError(f"non-positive even moment {top!r} (stderr {se[-1]!r}); "
                            "use the quadrature engine for high moments")
    return float(math.exp((math.log(top) - math.log(mass)) / deg))
