"""Bergman kernel models.

Every model exposes the *polarized* kernel P(z, v) = K(z, conj(v)), which is
holomorphic in both z and v. Derivative engines differentiate P along complex
directions, so a model only has to be evaluable at complex arguments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    HermitianForm,
    MultiIndex,
    as_points,
    enumerate_multiindices,
    inner,
    log_ball_constant,
    log_pochhammer,
    monomial_matrix,
)
from .errors import ConditioningError, DomainError, ParameterError, SingularityError
from .domains import annulus as annulus_domain
from .domains import ball as ball_domain
from .domains import ellipsoid as ellipsoid_domain
from .moments import c_alpha


@dataclass(frozen=True)
class QuadricLog:
    """log P(z, v) = log_const - mu * log(1 - z^T B v)."""

    mu: float
    B: np.ndarray
    log_const: float


def _conj_eval(f, v):
    """f^*(v) = conj(f(conj(v))); holomorphic when f is."""
    return np.conj(f(np.conj(v)))


class KernelModel:
    """Base class; subclasses implement :meth:`polarized`."""

    n: int
    quadric: QuadricLog | None = None
    name: str = "kernel"
    domain = None

    def polarized(self, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z, w) -> np.ndarray:
        z = as_points(z, self.n)
        w = as_points(w, self.n)
        return self.polarized(z, np.conj(w))

    def diagonal(self, z) -> np.ndarray:
        return np.real(self(z, z))


class BallKernel(KernelModel):
    def __init__(self, n: int):
        self.n = n
        self.name = f"ball(n={n})"
        self.domain = ball_domain(n)
        self.quadric = QuadricLog(float(n + 1), np.eye(n), log_ball_constant(n))

    def polarized(self, z, v):
        s = 1.0 - np.sum(z * v, axis=-1)
        return math.exp(self.quadric.log_const) * s ** (-(self.n + 1))


class RestrictedKernel(KernelModel):
    """A kernel formula declared on a smaller domain (same values, new stencil domain)."""

    def __init__(self, base: KernelModel, domain):
        if domain.n != base.n:
            raise ParameterError("restriction domain has the wrong dimension")
        self.base = base
        self.n = base.n
        self.domain = domain
        self.quadric = base.quadric
        self.name = f"{base.name}|{domain.name}"

    def polarized(self, z, v):
        return self.base.polarized(z, v)


def ball_kernel(n: int, z, w) -> complex | np.ndarray:
    """(n!/pi^n) (1 - <z, w>)^{-(n+1)} for z, w in the unit ball."""
    z = as_points(z, n)
    w = as_points(w, n)
    zw = inner(z, w)
    if np.any(zw == 1):
        raise SingularityError("<z, w> = 1: kernel is singular at boundary contact")
    if np.any(np.sum(np.abs(z) ** 2, axis=-1) >= 1) or np.any(np.sum(np.abs(w) ** 2, axis=-1) >= 1):
        raise DomainError("ball kernel needs |z| < 1 and |w| < 1")
    out = math.factorial(n) / math.pi**n / (1.0 - zw) ** (n + 1)
    return out[()] if out.ndim == 0 else (out if out.size > 1 else complex(out.ravel()[0]))


class EllipsoidKernel(KernelModel):
    """Kernel of E_H: C (1 - z H w^* / (n+1))^{-(n+1)}, C = (n!/pi^n) det H / (n+1)^n."""

    def __init__(self, H):
        form = H if isinstance(H, HermitianForm) else HermitianForm(H)
        self.form = form
        self.n = n = form.n
        self.name = "ellipsoid"
        self.domain = ellipsoid_domain(form)
        self.constant = math.factorial(n) / math.pi**n * form.det / (n + 1) ** n
        self.quadric = QuadricLog(float(n + 1), form.matrix / (n + 1), math.log(self.constant))

    def polarized(self, z, v):
        q = np.einsum("...i,ij,...j->...", z, self.quadric.B, v)
        return self.constant * (1.0 - q) ** (-(self.n + 1))


def ellipsoid_kernel(H, zeta) -> float:
    """On-diagonal kernel of E_H at the row vector zeta."""
    K = EllipsoidKernel(H)
    zeta = as_points(zeta, K.n)
    q = K.form.quadratic(zeta)
    if np.any(q >= K.n + 1):
        raise DomainError(f"zeta H zeta^* = {np.max(q):.6g} >= n + 1: point is outside E_H")
    out = K.constant / (1.0 - q / (K.n + 1)) ** (K.n + 1)
    return float(out) if np.ndim(out) == 0 else (float(out[0]) if out.size == 1 else out)


class PoweredKernel(KernelModel):
    """phi(z) conj(phi(w)) K_ball(z, w)^lam with the principal branch of the power.

    ``phi`` maps points (..., n) to values (...); ``None`` means phi = 1.
    """

    def __init__(self, n: int, lam: float, phi: Callable | None = None):
        if not lam > 0:
            raise ParameterError(f"lambda must be positive, got {lam}")
        self.n = n
        self.lam = float(lam)
        self.mu = (n + 1) * self.lam
        self.phi = phi
        self.name = f"powered(n={n}, lam={lam:g})"
        self.domain = ball_domain(n)
        self.log_const = self.lam * log_ball_constant(n)
        if phi is None:
            self.quadric = QuadricLog(self.mu, np.eye(n), self.log_const)

    def polarized(self, z, v):
        s = 1.0 - np.sum(z * v, axis=-1)
        out = np.exp(self.log_const - self.mu * np.log(s))
        if self.phi is not None:
            out = out * self.phi(z) * _conj_eval(self.phi, v)
        return out


def powered_kernel(lam: float, phi: Callable | None, z, w, n: int | None = None):
    z = as_points(z)
    n = z.shape[-1] if n is None else n
    return PoweredKernel(n, lam, phi)(z, w)


def deriv_power_kernel(beta, lam: float, n: int, w) -> complex:
    """d^beta/dz^beta of K_ball(z, w)^lam at z = 0: (n!/pi^n)^lam mu...(mu+|beta|-1) conj(w)^beta."""
    beta = MultiIndex(beta)
    if len(beta) != n:
        raise ParameterError(f"multi-index length {len(beta)} does not match n = {n}")
    if beta.order < 1:
        raise ParameterError("derivative order |beta| must be at least 1")
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    w = as_points(w, n)
    mu = (n + 1) * lam
    scale = math.exp(lam * log_ball_constant(n) + log_pochhammer(mu, beta.order))
    return scale * beta.power(np.conj(w))


@dataclass
class CoefficientTable:
    """Orthonormal-basis constants c_{alpha,lam} up to a total degree."""

    n: int
    lam: float
    degree: int
    coeffs: dict = field(default_factory=dict)

    @classmethod
    def build(cls, n: int, lam: float, degree: int) -> "CoefficientTable":
        idx = enumerate_multiindices(n, degree)
        return cls(n, float(lam), degree, {a: c_alpha(a, lam, n) for a in idx})

    def to_json(self) -> str:
        from .reporting import dumps

        return dumps({
            "n": self.n,
            "lambda": self.lam,
            "degree": self.degree,
            "coeffs": [{"alpha": list(a), "c": c} for a, c in self.coeffs.items()],
        })

    @classmethod
    def from_json(cls, text: str) -> "CoefficientTable":
        data = json.loads(text)
        missing = [k for k in ("n", "lambda", "degree", "coeffs") if k not in data]
        if missing:
            raise ParameterError(f"coefficient table is missing {missing}")
        coeffs = {MultiIndex(e["alpha"]): float(e["c"]) for e in data["coeffs"]}
        return cls(int(data["n"]), float(data["lambda"]), int(data["degree"]), coeffs)


class SeriesKernel(KernelModel):
    """sum_{|alpha| <= N} c_alpha^2 phi(z) z^alpha conj(phi(w) w^alpha)."""

    def __init__(self, table: CoefficientTable, phi: Callable | None = None, degree: int | None = None):
        self.n = table.n
        self.table = table
        self.phi = phi
        N = table.degree if degree is None else degree
        self.indices = [a for a in table.coeffs if a.order <= N]
        self.weights = np.array([table.coeffs[a] ** 2 for a in self.indices])
        self.name = f"series(N={N})"
        self.domain = ball_domain(self.n)

    def polarized(self, z, v):
        out = monomial_matrix(self.indices, z) * monomial_matrix(self.indices, v) @ self.weights
        if self.phi is not None:
            out = out * self.phi(z) * _conj_eval(self.phi, v)
        return out


def series_kernel(coefficients, phi, N: int, z, w):
    """Truncated orthonormal expansion; ``coefficients`` is a CoefficientTable or {alpha: c}."""
    if not isinstance(coefficients, CoefficientTable):
        coeffs = {MultiIndex(a): float(c) for a, c in coefficients.items()}
        n = len(next(iter(coeffs)))
        coefficients = CoefficientTable(n, float("nan"), max(a.order for a in coeffs), coeffs)
    return SeriesKernel(coefficients, phi, N)(z, w)


def series_tail_bound(n: int, lam: float, rho: float, N: int) -> float:
    """Bound on the degree > N tail of the series for |z|, |w| <= rho < 1.

    The degree-k shell equals (n!/pi^n)^lam (mu)_k / k! <z, w>^k exactly, so the
    tail is at most (n!/pi^n)^lam sum_{k>N} (mu)_k / k! rho^{2k}.
    """
    if not 0 <= rho < 1:
        raise ParameterError("need 0 <= rho < 1")
    mu = (n + 1) * lam
    x = rho * rho
    total = 0.0
    k = N + 1
    log_term = log_pochhammer(mu, k) - math.lgamma(k + 1) + k * math.log(x) if x > 0 else -math.inf
    while True:
        term = math.exp(log_term)
        total += term
        ratio = (mu + k) / (k + 1) * x
        if ratio < 1 and term * ratio / (1 - ratio) < 1e-3 * total + 1e-300:
            total += term * ratio / (1 - ratio)
            break
        log_term += math.log(ratio) if ratio > 0 else -math.inf
        k += 1
        if k > N + 100000:
            break
    return math.exp(lam * log_ball_constant(n)) * total


def truncation_degree(n: int, lam: float, rho: float, tol: float) -> int:
    """Smallest N whose tail bound is below tol / 2."""
    N = 0
    while series_tail_bound(n, lam, rho, N) > 0.5 * tol:
        N += 1
    return N


@dataclass(frozen=True)
class BasisDictionary:
    """Evaluatable holomorphic functions f_1..f_m.

    ``evaluate`` maps points (..., n) to (..., m). ``conj_evaluate`` is
    v -> conj(f(conj v)); it defaults to that formula and equals ``evaluate``
    for functions with real Taylor/Laurent coefficients.
    """

    n: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    size: int
    labels: tuple = ()
    conj_evaluate: Callable[[np.ndarray], np.ndarray] | None = None

    def conj_eval(self, v):
        if self.conj_evaluate is not None:
            return self.conj_evaluate(v)
        return np.conj(self.evaluate(np.conj(v)))

    def extend(self, funcs: Sequence[Callable], labels: Sequence[str] = ()) -> "BasisDictionary":
        """Append extra functions (e.g. branch functions on slit domains)."""
        base = self.evaluate

        def evaluate(z):
            extra = [np.asarray(f(z), dtype=complex) for f in funcs]
            return np.concatenate([base(z), np.stack(extra, axis=-1)], axis=-1)

        labels = tuple(self.labels) + tuple(labels or (f"f{k}" for k in range(len(funcs))))
        return BasisDictionary(self.n, evaluate, self.size + len(funcs), labels)


def monomial_dictionary(n: int, degree: int) -> BasisDictionary:
    idx = enumerate_multiindices(n, degree)

    def evaluate(z):
        return monomial_matrix(idx, np.asarray(z, dtype=complex))

    return BasisDictionary(n, evaluate, len(idx), tuple(tuple(a) for a in idx), conj_evaluate=evaluate)


def laurent_dictionary(kmin: int, kmax: int) -> BasisDictionary:
    """z^k for kmin <= k <= kmax on a planar domain avoiding 0."""
    ks = np.arange(kmin, kmax + 1)

    def evaluate(z):
        z = np.asarray(z, dtype=complex)[..., 0]
        return z[..., None] ** ks

    return BasisDictionary(1, evaluate, ks.size, tuple(int(k) for k in ks), conj_evaluate=evaluate)


class GramKernel(KernelModel):
    """sum_k e_k(z) conj(e_k(w)) for the dictionary orthonormalised by its Gram matrix."""

    def __init__(self, dictionary: BasisDictionary, gram: np.ndarray, engine: str = "quadrature", domain=None):
        self.n = dictionary.n
        self.domain = domain
        self.dictionary = dictionary
        self.gram = gram
        self.engine = engine
        self.name = f"gram(m={dictionary.size}, {engine})"
        ev = np.linalg.eigvalsh(gram)
        ratio = float(ev[0] / ev[-1]) if ev[-1] > 0 else -np.inf
        self.eigen_ratio = ratio
        if not ratio > 1e-10:
            raise ConditioningError(
                f"Gram matrix is ill-conditioned: smallest/largest eigenvalue = {ratio:.3e}", ratio
            )
        self._chol = np.linalg.cholesky(gram)
        self._chol_inv = np.linalg.inv(self._chol)

    def orthonormal(self, z):
        """e(z) = L^{-1} F(z) with G = L L^*; shape (..., m)."""
        return self.dictionary.evaluate(z) @ self._chol_inv.T

    def polarized(self, z, v):
        ez = self.dictionary.evaluate(z) @ self._chol_inv.T
        ev = self.dictionary.conj_eval(v) @ self._chol_inv.conj().T
        return np.sum(ez * ev, axis=-1)


def gram_matrix(domain, dictionary: BasisDictionary, engine: str = "quadrature", degree: int = 24,
                samples: int = 200_000, seed: int = 0, batch: int = 100_000) -> np.ndarray:
    """G_ab = int f_a conj(f_b) dm over the domain."""
    if engine == "quadrature":
        rule = domain.quadrature(degree)
        F = dictionary.evaluate(rule.nodes)
        G = (F * rule.weights[:, None]).T @ F.conj()
    elif engine in ("mc", "monte-carlo"):
        from .quadrature import ball_volume, uniform_ball_points

        rng = np.random.default_rng(seed)
        G = np.zeros((dictionary.size, dictionary.size), dtype=complex)
        done = 0
        while done < samples:
            k = min(batch, samples - done)
            pts = uniform_ball_points(rng, k, domain.n, domain.center, domain.radius)
            pts = pts[domain.contains(pts)]
            if pts.shape[0]:
                F = dictionary.evaluate(pts)
                G += F.T @ F.conj()
            done += k
        G *= ball_volume(domain.n, domain.radius) / samples
    else:
        raise ParameterError(f"unknown engine {engine!r}")
    return 0.5 * (G + G.conj().T)


def gram_kernel_estimate(domain, dictionary: BasisDictionary, engine: str = "quadrature",
                         degree: int = 24, samples: int = 200_000, seed: int = 0) -> GramKernel:
    """Kernel of the closed span of ``dictionary`` in L^2(domain).

    No regularisation: an ill-conditioned Gram matrix raises ConditioningError.
    """
    G = gram_matrix(domain, dictionary, engine, degree, samples, seed)
    return GramKernel(dictionary, G, engine, domain)


class AnnulusKernel(KernelModel):
    """Kernel of {r < |z| < 1} as a Laurent series in z conj(w).

    With ``kmin``/``kmax`` unset the truncation adapts to each call so that the
    omitted terms are below ``tol`` relative to the leading coefficient.
    """

    def __init__(self, r: float, kmin: int | None = None, kmax: int | None = None, tol: float = 1e-17):
        if not 0 < r < 1:
            raise ParameterError("inner radius must lie in (0, 1)")
        self.n = 1
        self.r = float(r)
        self.kmin = kmin
        self.kmax = kmax
        self.tol = tol
        self.name = f"annulus(r={r:g})"
        self.domain = annulus_domain(self.r)

    def log_coefficient(self, k: np.ndarray) -> np.ndarray:
        """log of the (positive) coefficient of (z conj w)^k."""
        k = np.asarray(k)
        lr = math.log(self.r)
        out = np.empty(k.shape, dtype=float)
        pos = k >= 0
        neg = k <= -2
        kk = k[pos]
        out[pos] = np.log(kk + 1.0) - math.log(math.pi) - np.log1p(-np.exp((2 * kk + 2) * lr))
        kk = k[neg]
        e = (2 * kk + 2) * lr  # > 0
        out[neg] = np.log(-(kk + 1.0)) - math.log(math.pi) - e - np.log1p(-np.exp(-e))
        out[k == -1] = -math.log(2 * math.pi * math.log(1.0 / self.r))
        return out

    def coefficient(self, k: int) -> float:
        return float(np.exp(self.log_coefficient(np.array([k]))[0]))

    def _range(self, x: np.ndarray) -> tuple[int, int]:
        kmax, kmin = self.kmax, self.kmin
        a = np.abs(x)
        if kmax is None:
            top = float(np.max(a))
            kmax = _geometric_cutoff(top, self.tol)
        if kmin is None:
            low = float(np.min(a))
            kmin = -_geometric_cutoff(self.r**2 / low if low > 0 else np.inf, self.tol) - 1
        return kmin, kmax

    def polarized(self, z, v):
        x = z[..., 0] * v[..., 0]
        kmin, kmax = self._range(x)
        ks = np.arange(kmin, kmax + 1)
        logc = self.log_coefficient(ks)
        lx = np.log(x.astype(complex))
        return np.sum(np.exp(logc + ks * lx[..., None]), axis=-1)


def _geometric_cutoff(q: float, tol: float, cap: int = 20000) -> int:
    """Smallest K with (K + 2) q^K < tol; q must be < 1."""
    if not q < 1:
        raise DomainError(f"Laurent series diverges: ratio {q:.6g} >= 1")
    if q == 0:
        return 1
    K = 1
    while (K + 2) * q**K >= tol:
        K += 1
        if K > cap:
            break
    return K


def annulus_kernel(r: float, z, w, kmin: int | None = None, kmax: int | None = None):
    z = as_points(z, 1)
    w = as_points(w, 1)
    for p in (z, w):
        a = np.abs(p[..., 0])
        if np.any(a <= r) or np.any(a >= 1):
            raise DomainError(f"annulus kernel needs {r} < |z| < 1")
    out = np.asarray(AnnulusKernel(r, kmin, kmax)(z, w))
    return complex(out.ravel()[0]) if out.size == 1 else out


class PullbackKernel(KernelModel):
    """det J_F(z) K_base(F(z), F(w)) conj(det J_F(w)) for a holomorphic map F."""

    def __init__(self, base: KernelModel, F, name: str | None = None, domain=None):
        self.base = base
        self.F = F
        self.n = base.n
        self.domain = domain if domain is not None else getattr(F, "source", None)
        self.name = name or f"pullback({base.name})"

    def polarized(self, z, v):
        Fz = self.F(z)
        Fv = np.conj(self.F(np.conj(v)))
        dz = self.F.jacobian_det(z)
        dv = np.conj(self.F.jacobian_det(np.conj(v)))
        return dz * self.base.polarized(Fz, Fv) * dv


def transformation_law_residual(f, K_src: KernelModel, K_tgt: KernelModel, z, w) -> float:
    """|K_src(z,w) - det J_f(z) K_tgt(f z, f w) conj(det J_f(w))| / (1 + |K_src(z,w)|)."""
    z = as_points(z, K_src.n)
    w = as_points(w, K_src.n)
    fz, fw = f(z), f(w)
    target = getattr(f, "target", None)
    if target is not None:
        if not (np.all(target.contains(fz)) and np.all(target.contains(fw))):
            raise DomainError(f"map leaves its target domain {target.name!r}")
    lhs = K_src(z, w)
    rhs = f.jacobian_det(z) * K_tgt(fz, fw) * np.conj(f.jacobian_det(w))
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs))))


def hermitian_defect(K: KernelModel, z, w) -> float:
    """max |K(z,w) - conj(K(w,z))| / (1 + |K(z,w)|)."""
    a = K(z, w)
    b = K(w, z)
    return float(np.max(np.abs(a - np.conj(b)) / (1.0 + np.abs(a))))
