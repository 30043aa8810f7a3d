"""Holomorphic maps: representative coordinates, the ellipsoid normalizer,
ball automorphisms, the slit-ball families and unitaries.

Maps act on points of shape (..., n). Jacobians are (..., n, n) with
``J[..., i, m] = d F_i / d z_m``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import HermitianForm, as_points, hermitian_sqrt
from .domains import DomainDescriptor, ball, ellipsoid, quartic_domain, slit_ball
from .errors import DomainError, ParameterError, ZeroDivisorError
from .kernels import KernelModel

JACOBIAN_POINTS = 16


def cauchy_jacobian(F: Callable, z: np.ndarray, radius: float = 1e-2, points: int = JACOBIAN_POINTS) -> np.ndarray:
    """Jacobian of a holomorphic map from discrete Cauchy integrals on circles."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    unit = radius * np.exp(2j * np.pi * np.arange(points) / points)
    # (..., points, n_dir, n)
    Z = z[..., None, None, :] + unit[:, None, None] * np.eye(n)
    vals = np.asarray(F(Z.reshape(-1, n))).reshape(Z.shape)
    c1 = np.fft.fft(vals, axis=-3)[..., 1, :, :] / points / radius  # (..., m, i)
    return np.swapaxes(c1, -1, -2)


@dataclass(frozen=True)
class HolomorphicMap:
    """An evaluatable holomorphic map with an optional analytic Jacobian."""

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    det: Callable[[np.ndarray], np.ndarray] | None = None
    source: DomainDescriptor | None = None
    target: DomainDescriptor | None = None
    name: str = "map"

    def __call__(self, z) -> np.ndarray:
        return self.func(np.asarray(z, dtype=complex))

    def jacobian(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.jac is not None:
            return self.jac(z)
        return cauchy_jacobian(self.func, z)

    def jacobian_det(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.det is not None:
            return self.det(z)
        return np.linalg.det(self.jacobian(z))

    def conj_eval(self, v) -> np.ndarray:
        """conj(F(conj v)), the map acting on second kernel slots."""
        return np.conj(self(np.conj(v)))

    def compose(self, other: "HolomorphicMap") -> "HolomorphicMap":
        """self o other."""
        def func(z):
            return self(other(z))

        def jac(z):
            return self.jacobian(other(z)) @ other.jacobian(z)

        return HolomorphicMap(func, self.n, jac, None, other.source, self.target, f"{self.name}o{other.name}")


def identity_map(n: int) -> HolomorphicMap:
    return HolomorphicMap(
        lambda z: z, n,
        jac=lambda z: np.broadcast_to(np.eye(n, dtype=complex), z.shape + (n,)).copy(),
        det=lambda z: np.ones(z.shape[:-1], dtype=complex),
        source=ball(n), target=ball(n), name="identity",
    )


def linear_map(M, name: str = "linear", source=None, target=None) -> HolomorphicMap:
    """z -> M z on column vectors."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    d = np.linalg.det(M)
    return HolomorphicMap(
        lambda z: z @ M.T, n,
        jac=lambda z: np.broadcast_to(M, z.shape + (n,)).copy(),
        det=lambda z: np.full(z.shape[:-1], d, dtype=complex),
        source=source, target=target, name=name,
    )


def unitary_map(U) -> HolomorphicMap:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ParameterError("a unitary must be a square matrix")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > 1e-12:
        raise ParameterError("matrix is not unitary to 1e-12")
    n = U.shape[0]
    return linear_map(U, "unitary", ball(n), ball(n))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorisation of a complex Gaussian matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def ellipsoid_membership(H, zeta) -> np.ndarray | bool:
    """zeta H zeta^* < n + 1."""
    form = H if isinstance(H, HermitianForm) else HermitianForm(H)
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.ndim == 0:
        zeta = zeta.reshape(1)
    out = form.quadratic(zeta) < form.n + 1
    return bool(out) if np.ndim(out) == 0 else out


def ellipsoid_normalizer(H) -> HolomorphicMap:
    """L(zeta) = zeta A / sqrt(n+1) for row vectors zeta, where H = A A^*.

    Maps the ellipsoid onto the unit ball; the Jacobian (column convention) is
    A^T / sqrt(n+1), so |det J|^2 = det H / (n+1)^n.
    """
    form = H if isinstance(H, HermitianForm) else HermitianForm(H)
    A = hermitian_sqrt(form.matrix)
    n = form.n
    return linear_map(A.T / math.sqrt(n + 1), "ellipsoid-normalizer", ellipsoid(form), ball(n))


class BallAutomorphism(HolomorphicMap):
    """phi_a followed by a unitary: U (a - P_a z - s_a Q_a z) / (1 - <z, a>), s_a = sqrt(1 - |a|^2)."""

    def __init__(self, a, U=None):
        a = np.asarray(a, dtype=complex).reshape(-1)
        m = a.size
        na2 = float(np.sum(np.abs(a) ** 2))
        if na2 >= 1:
            raise ParameterError(f"automorphism centre must satisfy |a| < 1, got |a| = {math.sqrt(na2):.6g}")
        U = np.eye(m, dtype=complex) if U is None else np.asarray(U, dtype=complex)
        sa = math.sqrt(1.0 - na2)
        P = np.outer(a, np.conj(a)) / na2 if na2 > 0 else np.zeros((m, m))
        Q = np.eye(m) - P
        # column form: phi(z) = U (a - (P + s Q) z) / (1 - a^* z)
        Mlin = P + sa * Q
        abar = np.conj(a)
        detU = np.linalg.det(U)

        def func(z):
            z = np.asarray(z, dtype=complex)
            den = 1.0 - z @ abar
            num = a - z @ Mlin.T
            return (num / den[..., None]) @ U.T

        def jac(z):
            z = np.asarray(z, dtype=complex)
            den = 1.0 - z @ abar
            num = a - z @ Mlin.T
            # d/dz_m [num_i / den] = -Mlin[i, m] / den + num_i abar_m / den^2
            J = -Mlin / den[..., None, None] + num[..., :, None] * abar / den[..., None, None] ** 2
            return U @ J

        def det(z):
            den = 1.0 - np.asarray(z, dtype=complex) @ abar
            return detU * (-1) ** m * (1.0 - na2) ** ((m + 1) / 2) / den ** (m + 1)

        super().__init__(func, m, jac, det, ball(m), ball(m), f"aut(B^{m})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "U", U)

    def det_root(self, z, k: int) -> np.ndarray:
        """A holomorphic branch of (det J)^(1/k): principal root of the constant times (1 - <z,a>)^(-(m+1)/k)."""
        m = self.n
        if (m + 1) % k:
            raise ParameterError(f"(det J)^(1/{k}) has no single-valued closed form for m = {m}")
        na2 = float(np.sum(np.abs(self.a) ** 2))
        c = np.linalg.det(self.U) * (-1) ** m * (1.0 - na2) ** ((m + 1) / 2)
        den = 1.0 - np.asarray(z, dtype=complex) @ np.conj(self.a)
        return complex(c) ** (1.0 / k) / den ** ((m + 1) // k)


def ball_automorphism_5_1(a: complex, z=None):
    """((a - z1)/(1 - abar z1), sqrt(1-|a|^2) z2/(1 - abar z1)); preserves B^2 and the slit {z2 = 0}.

    Returns the map, or its value at ``z`` when ``z`` is given.
    """
    a = complex(a)
    if abs(a) >= 1:
        raise ParameterError(f"need |a| < 1, got {abs(a):.6g}")
    s = math.sqrt(1.0 - abs(a) ** 2)
    ac = a.conjugate()

    def func(z):
        z = np.asarray(z, dtype=complex)
        den = 1.0 - ac * z[..., 0]
        return np.stack([(a - z[..., 0]) / den, s * z[..., 1] / den], axis=-1)

    def jac(z):
        z = np.asarray(z, dtype=complex)
        den = 1.0 - ac * z[..., 0]
        J = np.zeros(z.shape + (2,), dtype=complex)
        J[..., 0, 0] = (abs(a) ** 2 - 1.0) / den**2
        J[..., 1, 0] = s * z[..., 1] * ac / den**2
        J[..., 1, 1] = s / den
        return J

    def det(z):
        den = 1.0 - ac * np.asarray(z, dtype=complex)[..., 0]
        return -(s**3) / den**3

    F = HolomorphicMap(func, 2, jac, det, slit_ball(2), slit_ball(2), f"mobius(a={a:g})")
    if z is None:
        return F
    return F(as_points(z, 2))


def _phi_5_2_func(z):
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z[..., :-1] * z[..., -1:], z[..., -1:]], axis=-1)


def phi_map_5_2(n: int = 2) -> HolomorphicMap:
    """Phi(z', z_n) = (z' z_n, z_n) from the slit ball onto the quartic domain."""

    def func(z):
        z = np.asarray(z, dtype=complex)
        if np.any(z[..., -1] == 0):
            raise DomainError("Phi needs z_n != 0 (point lies on the removed hyperplane)")
        return _phi_5_2_func(z)

    def jac(z):
        z = np.asarray(z, dtype=complex)
        J = np.zeros(z.shape + (n,), dtype=complex)
        for i in range(n - 1):
            J[..., i, i] = z[..., -1]
            J[..., i, -1] = z[..., i]
        J[..., -1, -1] = 1.0
        return J

    def det(z):
        return np.asarray(z, dtype=complex)[..., -1] ** (n - 1)

    return HolomorphicMap(func, n, jac, det, slit_ball(n), quartic_domain(n), "Phi")


def phi_inverse_5_2(n: int = 2) -> HolomorphicMap:
    """Phi^{-1}(w', w_n) = (w' / w_n, w_n)."""

    def func(w):
        w = np.asarray(w, dtype=complex)
        if np.any(w[..., -1] == 0):
            raise DomainError("Phi^{-1} needs w_n != 0")
        return np.concatenate([w[..., :-1] / w[..., -1:], w[..., -1:]], axis=-1)

    def jac(w):
        w = np.asarray(w, dtype=complex)
        J = np.zeros(w.shape + (n,), dtype=complex)
        for i in range(n - 1):
            J[..., i, i] = 1.0 / w[..., -1]
            J[..., i, -1] = -w[..., i] / w[..., -1] ** 2
        J[..., -1, -1] = 1.0
        return J

    def det(w):
        return np.asarray(w, dtype=complex)[..., -1] ** (1 - n)

    return HolomorphicMap(func, n, jac, det, quartic_domain(n), slit_ball(n), "Phi^-1")


def family_5_3(A: BallAutomorphism, z=None):
    """phi(z', z_n) = (A(z'), T(z')^(1/n) z_n) with T = det J_A and n = dim A + 1.

    The branch of T^(1/n) is the principal root of T(0)-type constant times
    (1 - <z', a>)^(-1), which is holomorphic on the ball. The map preserves the
    unit ball and the hyperplane {z_n = 0}.
    """
    m = A.n
    n = m + 1

    def root(zp):
        return A.det_root(zp, n)

    def func(z):
        z = np.asarray(z, dtype=complex)
        zp = z[..., :-1]
        return np.concatenate([A(zp), (root(zp) * z[..., -1])[..., None]], axis=-1)

    def jac(z):
        z = np.asarray(z, dtype=complex)
        zp = z[..., :-1]
        J = np.zeros(z.shape + (n,), dtype=complex)
        J[..., :m, :m] = A.jacobian(zp)
        r = root(zp)
        # d/dz'_k of c (1 - <z', a>)^(-1) = r abar_k / (1 - <z', a>)
        den = 1.0 - zp @ np.conj(A.a)
        J[..., m, :m] = (r / den)[..., None] * np.conj(A.a) * z[..., -1:]
        J[..., m, m] = r
        return J

    def det(z):
        z = np.asarray(z, dtype=complex)
        zp = z[..., :-1]
        return A.jacobian_det(zp) * root(zp)

    dom = slit_ball(n) if n >= 2 else None
    F = HolomorphicMap(func, n, jac, det, dom, dom, f"family(n={n})")
    if z is None:
        return F
    return F(as_points(z, n))


def determinant_identity_residual(A: BallAutomorphism, zp) -> np.ndarray:
    """|(1 - |z'|^2)^n |T(z')|^2 - (1 - |A(z')|^2)^n| with n = dim A + 1."""
    zp = as_points(zp, A.n)
    n = A.n + 1
    T = A.jacobian_det(zp)
    lhs = (1.0 - np.sum(np.abs(zp) ** 2, axis=-1)) ** n * np.abs(T) ** 2
    rhs = (1.0 - np.sum(np.abs(A(zp)) ** 2, axis=-1)) ** n
    return np.abs(lhs - rhs)


def representative_coordinates(K: KernelModel, p, z, engine: str = "auto") -> np.ndarray:
    """w(z) = (G^T)^{-1} [d_v log P(z, conj p) - d_v log P(p, conj p)], G = g(p).

    Both gradients run through the same code path, so T_p(p) = 0 exactly.
    """
    return rep_coords_map(K, p, engine)(z)


def rep_coords_map(K: KernelModel, p, engine: str = "auto") -> HolomorphicMap:
    """T_p as a HolomorphicMap into the ellipsoid E_{g(p)}."""
    from .diffgeo import bergman_metric, grad_v_log, log_kernel_derivatives

    n = K.n
    p = as_points(p, n).reshape(n)
    pbar = np.conj(p)
    metric = bergman_metric(K, p, engine=engine)
    G = metric.g
    GT_inv = np.linalg.inv(G.T)
    base = grad_v_log(K, p[None], pbar, engine=engine)[0]

    def _check(z):
        P = K.polarized(z, np.broadcast_to(pbar, z.shape))
        bad = np.ravel(P == 0)
        if np.any(bad):
            pt = z.reshape(-1, n)[np.argmax(bad)]
            raise ZeroDivisorError(f"K(z, p) = 0 at z = {pt}; T_p is undefined there", point=pt)

    def func(z):
        z = as_points(z, n)
        _check(z)
        d = grad_v_log(K, z, pbar, engine=engine) - base
        return d @ GT_inv.T

    def jac(z):
        z = as_points(z, n)
        out = np.empty(z.shape + (n,), dtype=complex)
        for idx in np.ndindex(z.shape[:-1]):
            jet = log_kernel_derivatives(K, z[idx], v=pbar, engine=engine)
            out[idx] = GT_inv @ jet.g.T
        return out

    target = ellipsoid(HermitianForm(G))
    return HolomorphicMap(func, n, jac, None, getattr(K, "domain", None), target, "T_p")


def _complex(x) -> complex:
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return complex(x.replace(" ", ""))
    return complex(x)


def parse_complex_vector(data) -> np.ndarray:
    return np.array([_complex(x) for x in data], dtype=complex)


def map_from_descriptor(desc, kernel_factory: Callable | None = None) -> HolomorphicMap:
    """Build a map from a scenario descriptor.

    Kinds: ``mobius_5_1`` (field ``a``), ``phi_5_2``, ``phi_5_2_inverse``,
    ``unitary`` (field ``matrix``), ``rep_coords`` (fields ``p``, ``kernel``),
    ``family_5_3`` (fields ``a``, optional ``n``) and ``identity`` (field ``n``).
    """
    if isinstance(desc, str):
        desc = json.loads(desc)
    kind = desc.get("kind")
    if kind == "mobius_5_1":
        return ball_automorphism_5_1(_complex(desc["a"]))
    if kind == "phi_5_2":
        return phi_map_5_2(int(desc.get("n", 2)))
    if kind == "phi_5_2_inverse":
        return phi_inverse_5_2(int(desc.get("n", 2)))
    if kind == "unitary":
        return unitary_map([[_complex(x) for x in row] for row in desc["matrix"]])
    if kind == "family_5_3":
        a = desc["a"]
        a = parse_complex_vector(a) if isinstance(a, list) and a and not isinstance(a[0], (int, float)) \
            else np.atleast_1d(np.asarray([_complex(a)] if not isinstance(a, list) else a, dtype=complex))
        return family_5_3(BallAutomorphism(a))
    if kind == "identity":
        return identity_map(int(desc["n"]))
    if kind == "rep_coords":
        if kernel_factory is None:
            from .verify import kernel_from_spec as kernel_factory
        K = kernel_factory(desc["kernel"])
        return rep_coords_map(K, parse_complex_vector(desc["p"]))
    raise ParameterError(f"unknown map kind {kind!r}")

