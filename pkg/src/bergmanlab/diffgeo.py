"""Bergman metric, curvature tensor and holomorphic sectional curvature.

All quantities derive from the mixed Wirtinger derivatives of log K. They are
taken on the polarized kernel P(z, v) = K(z, conj v): with v = conj(z),

    g_{i jbar}   = d_{z_i} d_{v_j} log P
    d_k g_{i jbar} = d_{z_i} d_{z_k} d_{v_j} log P, and so on.

Three engines produce these jets.

``analytic``
    Exact formulas for kernels of the form C (1 - z^T B v)^(-mu).
``cauchy``
    Discrete Cauchy integrals on a torus |s| = |t| = r around the base point,
    one 2-D FFT per pair of directions. Spectrally accurate for analytic kernels.
``fd``
    Real-step central differences with steps h and 2h combined by Richardson
    extrapolation.

Mixed components come from directional derivatives by polarization, e.g.
T[i, k] = (D^2_{e_i + e_k} - D^2_{e_i} - D^2_{e_k}) / 2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import as_points
from .errors import GeometryError, IndefiniteMetricError, ParameterError
from .kernels import KernelModel

CAUCHY_POINTS = 24
CAUCHY_FRACTION = 0.3
FD_FRACTION = 0.015
FD_MAX_STEP = 0.02


@dataclass(frozen=True)
class Jet:
    """Derivatives of log P at (z, v) up to order two in each slot.

    ``g[i, j]`` = d_zi d_vj, ``dz[i, k, j]`` = d_zi d_zk d_vj,
    ``dv[i, j, l]`` = d_zi d_vj d_vl, ``dzdv[i, j, k, l]`` = d_zi d_vj d_zk d_vl.
    """

    z: np.ndarray
    v: np.ndarray
    g: np.ndarray
    dz: np.ndarray
    dv: np.ndarray
    dzdv: np.ndarray
    engine: str
    step: float


def _quadric_jet(K: KernelModel, z: np.ndarray, v: np.ndarray) -> Jet:
    q = K.quadric
    B, mu = q.B, q.mu
    s = 1.0 - z @ B @ v
    a = B @ v
    b = B.T @ z
    g = mu * (B / s + np.outer(a, b) / s**2)
    dz = mu * (
        np.einsum("ij,k->ikj", B, a) / s**2
        + np.einsum("kj,i->ikj", B, a) / s**2
        + 2 * np.einsum("i,j,k->ikj", a, b, a) / s**3
    )
    dv = mu * (
        np.einsum("ij,l->ijl", B, b) / s**2
        + np.einsum("il,j->ijl", B, b) / s**2
        + 2 * np.einsum("i,j,l->ijl", a, b, b) / s**3
    )
    dzdv = mu * (
        np.einsum("ij,kl->ijkl", B, B) / s**2
        + 2 * np.einsum("ij,k,l->ijkl", B, a, b) / s**3
        + np.einsum("kj,il->ijkl", B, B) / s**2
        + 2 * np.einsum("kj,i,l->ijkl", B, a, b) / s**3
        + 2 * np.einsum("il,j,k->ijkl", B, b, a) / s**3
        + 2 * np.einsum("i,j,kl->ijkl", a, b, B) / s**3
        + 6 * np.einsum("i,j,k,l->ijkl", a, b, a, b) / s**4
    )
    return Jet(z, v, g, dz, dv, dzdv, "analytic", 0.0)


def _directions(n: int) -> np.ndarray:
    dirs = [np.eye(n)[i] for i in range(n)]
    dirs += [np.eye(n)[i] + np.eye(n)[k] for i in range(n) for k in range(i + 1, n)]
    return np.array(dirs, dtype=complex)


def _take1(X: np.ndarray, axis: int, n: int) -> np.ndarray:
    return np.take(X, np.arange(n), axis=axis)


def _polarize2(X: np.ndarray, axis: int, n: int) -> np.ndarray:
    """Replace a direction axis by a symmetric (n, n) pair of axes."""
    X = np.moveaxis(X, axis, 0)
    out = np.empty((n, n) + X.shape[1:], dtype=complex)
    for i in range(n):
        out[i, i] = X[i]
    m = n
    for i in range(n):
        for k in range(i + 1, n):
            val = 0.5 * (X[m] - X[i] - X[k])
            out[i, k] = val
            out[k, i] = val
            m += 1
    return np.moveaxis(out, [0, 1], [axis, axis + 1])


def _tensors_from_directional(D: dict, n: int):
    g = _take1(_take1(D[1, 1], 0, n), 1, n)
    dz = _take1(_polarize2(D[2, 1], 0, n), 2, n)
    dv = _polarize2(_take1(D[1, 2], 0, n), 1, n)
    t = _polarize2(_polarize2(D[2, 2], 0, n), 2, n)  # [i, k, j, l]
    return g, dz, dv, np.transpose(t, (0, 2, 1, 3))


def _evaluate_log(K: KernelModel, Z: np.ndarray, V: np.ndarray, P0: complex) -> np.ndarray:
    Z, V = np.broadcast_arrays(Z, V)
    shape = Z.shape[:-1]
    P = K.polarized(Z.reshape(-1, K.n), V.reshape(-1, K.n)).reshape(shape)
    if not np.all(np.isfinite(P)) or np.any(P == 0):
        raise GeometryError("kernel is singular or zero on the derivative stencil; use a smaller step")
    return np.log(P / P0)


def _check_stencil(domain, z_pts: np.ndarray, w_pts: np.ndarray) -> None:
    if domain is None:
        return
    pts = np.concatenate([z_pts.reshape(-1, domain.n), w_pts.reshape(-1, domain.n)])
    if not np.all(domain.contains(pts)):
        raise GeometryError(
            f"derivative stencil leaves domain {domain.name!r}; pass a smaller step or move away from the boundary"
        )


def _cauchy_jet(K, z, v, r, domain, M=CAUCHY_POINTS) -> Jet:
    n = K.n
    dirs = _directions(n)
    radii = r / np.linalg.norm(dirs, axis=1).real
    theta = 2.0 * np.pi * np.arange(M) / M
    unit = np.exp(1j * theta)
    # offsets[d, m, :] = radii[d] e^{i theta_m} dirs[d]
    offsets = radii[:, None, None] * unit[None, :, None] * dirs[:, None, :]
    zs = z + offsets
    vs = v + offsets
    _check_stencil(domain, zs, np.conj(vs))
    P0 = K.polarized(z[None], v[None])[0]
    f = _evaluate_log(K, zs[:, None, :, None, :], vs[None, :, None, :, :], P0)
    C = np.fft.fft2(f, axes=(2, 3)) / (M * M)
    D = {}
    for p in (1, 2):
        for q in (1, 2):
            scale = math.factorial(p) * math.factorial(q) / np.outer(radii**p, radii**q)
            D[p, q] = C[:, :, p, q] * scale
    return Jet(z, v, *_tensors_from_directional(D, n), engine="cauchy", step=float(r))


_D1 = np.array([0.0, -0.5, 0.0, 0.5, 0.0])
_D2 = np.array([0.0, 1.0, -2.0, 1.0, 0.0])
_D1W = np.array([-0.25, 0.0, 0.0, 0.0, 0.25])
_D2W = np.array([0.25, 0.0, -0.5, 0.0, 0.25])


def _fd_jet(K, z, v, h, domain) -> Jet:
    n = K.n
    dirs = _directions(n)
    steps = h / np.linalg.norm(dirs, axis=1).real
    grid = np.arange(-2, 3, dtype=float)
    offsets = steps[:, None, None] * grid[None, :, None] * dirs[:, None, :]
    zs = z + offsets
    vs = v + offsets
    _check_stencil(domain, zs, np.conj(vs))
    P0 = K.polarized(z[None], v[None])[0]
    f = _evaluate_log(K, zs[:, None, :, None, :], vs[None, :, None, :, :], P0)
    fine = {1: _D1, 2: _D2}
    wide = {1: _D1W, 2: _D2W}
    D = {}
    for p in (1, 2):
        for q in (1, 2):
            scale = 1.0 / np.outer(steps**p, steps**q)
            Dh = np.einsum("x,y,abxy->ab", fine[p], fine[q], f) * scale
            D2h = np.einsum("x,y,abxy->ab", wide[p], wide[q], f) * scale
            D[p, q] = (4.0 * Dh - D2h) / 3.0
    return Jet(z, v, *_tensors_from_directional(D, n), engine="fd", step=float(h))


def _distance(domain, z: np.ndarray, v: np.ndarray) -> float | None:
    if domain is None or domain.boundary_distance is None:
        return None
    d = float(min(domain.boundary_distance(z[None])[0], domain.boundary_distance(np.conj(v)[None])[0]))
    if not d > 0:
        raise GeometryError(f"base point is not interior to {domain.name!r} (distance {d:.3g})")
    return d


def log_kernel_derivatives(K: KernelModel, z, v=None, engine: str = "auto", step: float | None = None,
                           domain="kernel") -> Jet:
    """Mixed derivatives of log K at (z, conj v), up to d_z^2 d_zbar^2.

    Parameters
    ----------
    K : KernelModel
    z : array_like, shape (n,)
    v : array_like, optional
        Second-slot argument of the polarized kernel; defaults to conj(z).
    engine : {"auto", "analytic", "cauchy", "fd"}
        "auto" picks the analytic path when the kernel declares a quadric
        logarithm and the Cauchy engine otherwise.
    step : float, optional
        Cauchy radius or finite-difference step. By default a fixed fraction
        of the distance to the boundary.
    domain : DomainDescriptor or None
        Domain used to size and check the stencil; defaults to ``K.domain``.
    """
    z = as_points(z, K.n).reshape(K.n)
    v = np.conj(z) if v is None else as_points(v, K.n).reshape(K.n)
    if engine == "auto":
        engine = "analytic" if K.quadric is not None else "cauchy"
    if engine == "analytic":
        if K.quadric is None:
            raise ParameterError(f"no analytic derivatives for {K.name}")
        return _quadric_jet(K, z, v)
    if domain == "kernel":
        domain = getattr(K, "domain", None)
    d = _distance(domain, z, v)
    if engine == "cauchy":
        r = step if step is not None else CAUCHY_FRACTION * (d if d is not None else 0.1)
        return _cauchy_jet(K, z, v, r, domain)
    if engine == "fd":
        h = step if step is not None else min(FD_FRACTION * (d if d is not None else 0.1), FD_MAX_STEP)
        return _fd_jet(K, z, v, h, domain)
    raise ParameterError(f"unknown derivative engine {engine!r}")


def grad_v_log(K: KernelModel, z, v, engine: str = "auto", step: float | None = None) -> np.ndarray:
    """d_v log P(z, v) for a batch of z (..., n) at a fixed v (n,)."""
    z = as_points(z, K.n)
    v = as_points(v, K.n).reshape(K.n)
    if engine == "auto":
        engine = "analytic" if K.quadric is not None else "cauchy"
    if engine == "analytic":
        q = K.quadric
        s = 1.0 - z @ (q.B @ v)
        return q.mu * (z @ q.B) / s[..., None]
    if engine != "cauchy":
        raise ParameterError(f"unknown gradient engine {engine!r}")
    if step is None:
        dom = getattr(K, "domain", None)
        d = dom.boundary_distance(np.conj(v)[None])[0] if dom is not None and dom.boundary_distance else 0.1
        step = CAUCHY_FRACTION * float(d)
    M = CAUCHY_POINTS
    unit = step * np.exp(2j * np.pi * np.arange(M) / M)
    vs = v + unit[:, None, None] * np.eye(K.n)[None]  # (M, n_dir, n)
    Z = np.broadcast_to(z[..., None, None, :], z.shape[:-1] + (M, K.n, K.n))
    V = np.broadcast_to(vs, Z.shape)
    P = K.polarized(Z.reshape(-1, K.n), V.reshape(-1, K.n)).reshape(Z.shape[:-1])
    P0 = K.polarized(z, np.broadcast_to(v, z.shape))
    if np.any(P0 == 0):
        from .errors import ZeroDivisorError

        bad = z.reshape(-1, K.n)[np.argmax(np.ravel(P0 == 0))]
        raise ZeroDivisorError(f"K(z, p) = 0 at z = {bad}", point=bad)
    f = np.log(P / P0[..., None, None])
    c1 = np.fft.fft(f, axis=-2)[..., 1, :] / M
    return c1 / step


@dataclass(frozen=True)
class MetricValue:
    z: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    engine: str = "analytic"

    @property
    def inverse_defect(self) -> float:
        return float(np.max(np.abs(self.g @ self.g_inv - np.eye(self.g.shape[0]))))


def _metric_from_matrix(z, g, engine) -> MetricValue:
    g = 0.5 * (g + g.conj().T)
    ev = np.linalg.eigvalsh(g)
    if not ev[0] > 0:
        raise IndefiniteMetricError(
            f"Hessian of log K is not positive-definite at z = {z}: eigenvalues {ev}", eigenvalues=ev
        )
    return MetricValue(z, g, np.linalg.inv(g), engine)


def bergman_metric(K: KernelModel, z, engine: str = "auto", step: float | None = None) -> MetricValue:
    """g_{i jbar}(z) = d_{z_i} d_{zbar_j} log K(z, z) as an (n, n) Hermitian matrix."""
    z = as_points(z, K.n).reshape(K.n)
    if np.real(K.polarized(z[None], np.conj(z)[None])[0]) <= 0:
        raise IndefiniteMetricError(f"K(z, z) is not positive at z = {z}", eigenvalues=np.array([]))
    jet = log_kernel_derivatives(K, z, engine=engine, step=step)
    return _metric_from_matrix(z, jet.g, jet.engine)


def ball_metric(z) -> np.ndarray:
    """(n+1)[(1 - |z|^2) delta_ij + conj(z_i) z_j] / (1 - |z|^2)^2."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    n = z.size
    s = 1.0 - float(np.sum(np.abs(z) ** 2))
    return (n + 1) * (s * np.eye(n) + np.outer(np.conj(z), z)) / s**2


@dataclass(frozen=True)
class CurvatureValue:
    """R_{i jbar k lbar} at z with the metric it was built from."""

    z: np.ndarray
    tensor: np.ndarray
    metric: MetricValue
    engine: str

    def sectional(self, X) -> complex:
        X = np.asarray(X, dtype=complex).reshape(-1)
        if not np.any(X):
            raise ParameterError("tangent vector X must be nonzero")
        Xc = np.conj(X)
        num = np.einsum("ijkl,i,j,k,l->", self.tensor, X, Xc, X, Xc)
        den = np.real(X @ self.metric.g @ Xc) ** 2
        return num / den

    def symmetry_defect(self) -> float:
        R = self.tensor
        scale = max(1.0, float(np.max(np.abs(R))))
        d1 = np.max(np.abs(R - np.transpose(R, (2, 1, 0, 3))))
        d2 = np.max(np.abs(R - np.transpose(R, (0, 3, 2, 1))))
        return float(max(d1, d2) / scale)


def curvature_from_jet(jet: Jet) -> CurvatureValue:
    metric = _metric_from_matrix(jet.z, jet.g, jet.engine)
    # R = -d_k d_lbar g_{i jbar} + g^{q pbar} (d_k g_{i qbar}) (d_lbar g_{p jbar})
    ginv = np.linalg.inv(jet.g)
    R = -jet.dzdv + np.einsum("ikq,qp,pjl->ijkl", jet.dz, ginv, jet.dv)
    return CurvatureValue(jet.z, R, metric, jet.engine)


def curvature_tensor(K: KernelModel, z, engine: str = "auto", step: float | None = None) -> CurvatureValue:
    return curvature_from_jet(log_kernel_derivatives(K, z, engine=engine, step=step))


def sectional_curvature(K: KernelModel, z, X, engine: str = "auto", step: float | None = None) -> float:
    """H(z, X) = R(X, Xbar, X, Xbar) / g(X, Xbar)^2; for the unit ball -2/(n+1)."""
    X = np.asarray(X, dtype=complex).reshape(-1)
    if not np.any(X):
        raise ParameterError("tangent vector X must be nonzero")
    return float(np.real(curvature_tensor(K, z, engine, step).sectional(X)))


@dataclass
class CurvatureReport:
    """Sectional curvature values at seeded random (z, X) plus summary statistics."""

    kernel: str
    domain: str
    points: np.ndarray
    directions: np.ndarray
    values: np.ndarray
    engine: str
    seed: int
    tolerance: float = 1e-6
    imag_max: float = 0.0
    symmetry_max: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def max(self) -> float:
        return float(np.max(self.values))

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def spread(self) -> float:
        return self.max - self.min

    @property
    def constant(self) -> bool:
        return self.spread <= self.tolerance

    def summary(self) -> dict:
        return {
            "kernel": self.kernel, "domain": self.domain, "engine": self.engine, "seed": self.seed,
            "samples": int(self.values.size), "min": self.min, "max": self.max, "mean": self.mean,
            "spread": self.spread, "tolerance": self.tolerance, "constant": self.constant,
            "imag_max": self.imag_max, "symmetry_max": self.symmetry_max,
        }

    def to_dict(self) -> dict:
        from .reporting import SCHEMA_VERSION

        return {
            "schema": SCHEMA_VERSION,
            "summary": self.summary(),
            "samples": [
                {"z": _pairs(z), "X": _pairs(X), "H": float(h)}
                for z, X, h in zip(self.points, self.directions, self.values)
            ],
        }

    def to_json(self) -> str:
        from .reporting import dumps

        return dumps(self.to_dict())

    def to_csv(self) -> str:
        n = self.points.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = []
        for j in range(n):
            head += [f"z{j + 1}_re", f"z{j + 1}_im"]
        for j in range(n):
            head += [f"X{j + 1}_re", f"X{j + 1}_im"]
        w.writerow(head + ["H"])
        for z, X, h in zip(self.points, self.directions, self.values):
            row = []
            for c in list(z) + list(X):
                row += [f"{c.real:.17g}", f"{c.imag:.17g}"]
            w.writerow(row + [f"{h:.17g}"])
        s = self.summary()
        w.writerow(["# summary", f"min={s['min']:.17g}", f"max={s['max']:.17g}", f"mean={s['mean']:.17g}",
                    f"spread={s['spread']:.17g}", f"constant={s['constant']}"])
        return buf.getvalue()


def _pairs(v) -> list:
    return [[float(c.real), float(c.imag)] for c in v]


def curvature_scan(K: KernelModel, domain, samples: int = 200, seed: int = 0, engine: str = "auto",
                   max_norm: float | None = None, margin: float | None = None, tolerance: float = 1e-6,
                   step: float | None = None, points: np.ndarray | None = None) -> CurvatureReport:
    """Holomorphic sectional curvature at seeded random interior points and directions.

    Points are uniform in ``domain`` and, if given, restricted to ``|z| <= max_norm``
    and to boundary distance at least ``margin``. Directions are standard complex
    Gaussian vectors.
    """
    if samples < 1:
        raise ParameterError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    if points is None:
        pts = []
        have = 0
        sub = 0
        while have < samples:
            cand = domain.sample(4 * samples, seed=int(rng.integers(2**63)))
            keep = np.ones(cand.shape[0], dtype=bool)
            if max_norm is not None:
                keep &= np.linalg.norm(cand, axis=1) <= max_norm
            if margin is not None and domain.boundary_distance is not None:
                keep &= domain.boundary_distance(cand) >= margin
            pts.append(cand[keep])
            have += int(keep.sum())
            sub += 1
            if sub > 50 and have == 0:
                raise ParameterError("no sample points satisfy the scan restrictions")
        points = np.concatenate(pts)[:samples]
    X = rng.standard_normal((points.shape[0], K.n)) + 1j * rng.standard_normal((points.shape[0], K.n))
    values = np.empty(points.shape[0])
    imag = 0.0
    sym = 0.0
    used = engine
    for k, (z, x) in enumerate(zip(points, X)):
        R = curvature_tensor(K, z, engine=engine, step=step)
        h = R.sectional(x)
        values[k] = h.real
        imag = max(imag, abs(h.imag))
        sym = max(sym, R.symmetry_defect())
        used = R.engine
    return CurvatureReport(K.name, domain.name, points, X, values, used, seed, tolerance, imag, sym)


def isometry_residual(T, K_src: KernelModel, K_tgt: KernelModel, z, engine: str = "auto") -> float:
    """||g_src(z) - J^T g_tgt(T z) conj(J)||_F / ||g_src(z)||_F.

    With G[i, j] = g_{i jbar}, a tangent vector X has length X^T G conj(X), so the
    pulled-back metric matrix is J^T G_tgt conj(J).
    """
    z = as_points(z, K_src.n).reshape(K_src.n)
    g_src = bergman_metric(K_src, z, engine=engine).g
    Tz = np.asarray(T(z[None]))[0]
    target = getattr(T, "target", None)
    if target is not None and not np.all(target.contains(Tz[None])):
        from .errors import DomainError

        raise DomainError(f"T(z) lies outside the target domain {target.name!r}")
    g_tgt = bergman_metric(K_tgt, Tz, engine=engine).g
    J = np.asarray(T.jacobian(z[None]))[0]
    pulled = J.T @ g_tgt @ np.conj(J)
    return float(np.linalg.norm(g_src - pulled) / np.linalg.norm(g_src))
