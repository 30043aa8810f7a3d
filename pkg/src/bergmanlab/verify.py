"""Scenario registry: named, seeded checks with provenance-tagged expectations.

A scenario passes when every expectation holds. Negative controls are ordinary
scenarios whose expectations demand that a positive check *fails* by a declared
margin; their ``positive`` expectations are reported alongside so a control that
accidentally passes the positive check is visible.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import HermitianForm
from .diffgeo import bergman_metric, curvature_scan, isometry_residual
from .domains import annulus, ball, builtin_domain, hartogs_removed_ball, quartic_domain, slit_ball
from .errors import BergmanLabError, ParameterError, ScenarioError
from .kernels import (
    AnnulusKernel,
    BallKernel,
    CoefficientTable,
    EllipsoidKernel,
    PoweredKernel,
    PullbackKernel,
    RestrictedKernel,
    SeriesKernel,
    gram_kernel_estimate,
    laurent_dictionary,
    monomial_dictionary,
    transformation_law_residual,
)
from .maps import (
    BallAutomorphism,
    ball_automorphism_5_1,
    determinant_identity_residual,
    ellipsoid_normalizer,
    family_5_3,
    phi_inverse_5_2,
    phi_map_5_2,
    random_unitary,
    rep_coords_map,
)
from .moments import (
    MomentMeasure,
    even_moment_closed_form,
    moment_identity_residual,
    powered_ball_density,
    stirling_ratio_sequence,
    support_reach_estimate,
)
from .reporting import SCHEMA_VERSION, dumps

DEFAULT_SEED = int.from_bytes(b"B3RGMAN", "big")
PROVENANCE_TAGS = ("published", "derived", "trivial")
CHECK_KINDS = (
    "curvature-constancy", "moment-identity", "kernel-equality", "stirling-limit",
    "isometry", "map-identity", "support-reach", "closed-form",
)
_RELATIONS: dict[str, Callable[[float, float], bool]] = {
    "<=": lambda v, b: v <= b,
    "<": lambda v, b: v < b,
    ">=": lambda v, b: v >= b,
    ">": lambda v, b: v > b,
}


def scenario_seed(master_seed: int, name: str) -> int:
    """64-bit seed derived from the master seed and the scenario name."""
    h = hashlib.blake2b(f"{int(master_seed)}:{name}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


@dataclass(frozen=True)
class Expectation:
    statistic: str
    relation: str
    bound: float
    provenance: str

    def __post_init__(self):
        if self.relation not in _RELATIONS:
            raise ScenarioError(f"unknown relation {self.relation!r}", missing=[])
        tag = (self.provenance or "").split(":", 1)[0].strip()
        if tag not in PROVENANCE_TAGS:
            raise ScenarioError(
                f"expectation on {self.statistic!r} lacks a provenance tag ({'/'.join(PROVENANCE_TAGS)})",
                missing=["provenance"],
            )

    def holds(self, value: float) -> bool:
        return bool(np.isfinite(value)) and _RELATIONS[self.relation](value, self.bound)

    def margin(self, value: float) -> float:
        """Signed slack, relative to the bound when the bound is nonzero."""
        if not np.isfinite(value):
            return -math.inf
        raw = self.bound - value if self.relation in ("<=", "<") else value - self.bound
        return raw / abs(self.bound) if self.bound else raw

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "relation": self.relation, "bound": self.bound,
                "provenance": self.provenance}


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    params: dict
    expected: tuple
    negative_control: bool = False
    positive: tuple = ()
    description: str = ""

    def __post_init__(self):
        if self.kind not in CHECK_KINDS:
            raise ScenarioError(f"scenario {self.name!r}: unknown kind {self.kind!r}", missing=[])
        if not self.expected:
            raise ScenarioError(f"scenario {self.name!r} declares no expected values", missing=["expected"])
        if self.negative_control and not self.positive:
            raise ScenarioError(f"negative control {self.name!r} needs its positive check", missing=["positive"])

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        missing = [k for k in ("name", "kind", "expected") if k not in data]
        if missing:
            raise ScenarioError(f"scenario is missing fields {missing}", missing=missing)

        def exps(items):
            out = []
            for e in items:
                lack = [k for k in ("statistic", "relation", "bound", "provenance") if k not in e]
                if lack:
                    raise ScenarioError(f"scenario {data['name']!r}: expectation missing {lack}", missing=lack)
                out.append(Expectation(e["statistic"], e["relation"], float(e["bound"]), e["provenance"]))
            return tuple(out)

        return cls(
            name=data["name"], kind=data["kind"], params=dict(data.get("params", {})),
            expected=exps(data["expected"]), negative_control=bool(data.get("negative_control", False)),
            positive=exps(data.get("positive", [])), description=data.get("description", ""),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name, "kind": self.kind, "params": self.params,
            "expected": [e.to_dict() for e in self.expected],
            "negative_control": self.negative_control,
            "positive": [e.to_dict() for e in self.positive],
            "description": self.description,
        }


def load_scenarios(path_or_text) -> list[Scenario]:
    """Scenarios from a JSON file path or JSON text: a list or {"scenarios": [...]}."""
    text = path_or_text
    if not str(path_or_text).lstrip().startswith(("{", "[")):
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}", missing=[]) from None
    items = data.get("scenarios") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise ScenarioError("scenario file must hold a list under 'scenarios'", missing=["scenarios"])
    return [Scenario.from_dict(d) for d in items]


# builders ---------------------------------------------------------------------------

def domain_from_spec(spec) -> object:
    spec = dict(spec)
    kind = spec.pop("kind")
    n = int(spec.pop("n", 1))
    if kind == "ellipsoid":
        from .domains import ellipsoid

        return ellipsoid(_matrix(spec["H"]))
    return builtin_domain(kind, n, **spec)


def kernel_from_spec(spec):
    spec = dict(spec)
    kind = spec.get("kind")
    n = int(spec.get("n", 1))
    if kind == "ball":
        K = BallKernel(n)
        if "domain" in spec:
            K = RestrictedKernel(K, builtin_domain(spec["domain"], n))
        return K
    if kind == "powered":
        return PoweredKernel(n, float(spec["lambda"]))
    if kind == "ellipsoid":
        return EllipsoidKernel(_matrix(spec["H"]))
    if kind == "annulus":
        return AnnulusKernel(float(spec["r"]))
    if kind == "pullback-d2":
        return PullbackKernel(BallKernel(n), phi_inverse_5_2(n), name=f"ball o Phi^-1 (n={n})",
                              domain=quartic_domain(n))
    raise ParameterError(f"unknown kernel kind {kind!r}")


def _matrix(rows) -> np.ndarray:
    from .maps import _complex

    return np.array([[_complex(x) for x in row] for row in rows], dtype=complex)


# checks -----------------------------------------------------------------------------

def _check_curvature(p: dict, seed: int) -> dict:
    K = kernel_from_spec(p["kernel"])
    dom = domain_from_spec(p["domain"])
    obs = {}
    points = None
    if "min_last_coordinate" in p:
        pts = dom.sample(20 * p["samples"], seed)
        keep = np.abs(pts[:, -1]) >= p["min_last_coordinate"]
        if "max_norm" in p:
            keep &= np.linalg.norm(pts, axis=1) <= p["max_norm"]
        points = pts[keep][: p["samples"]]
    for eng in p.get("engines", ["auto"]):
        rep = curvature_scan(K, dom, p["samples"], seed, engine=eng, max_norm=p.get("max_norm"),
                             points=points)
        sfx = "" if len(p.get("engines", ["auto"])) == 1 else f"_{eng}"
        obs[f"mean{sfx}"] = rep.mean
        obs[f"spread{sfx}"] = rep.spread
        obs[f"symmetry{sfx}"] = rep.symmetry_max
        if "value" in p:
            obs[f"max_error{sfx}"] = float(np.max(np.abs(rep.values - p["value"])))
    if p.get("roundtrip_samples"):
        F, Finv = phi_map_5_2(2), phi_inverse_5_2(2)
        z = slit_ball(2).sample(p["roundtrip_samples"], seed + 1)
        obs["roundtrip_error"] = float(np.max(np.abs(Finv(F(z)) - z)))
    return obs


def _measure(spec: dict, seed: int, samples: int, engine: str) -> MomentMeasure:
    dom = domain_from_spec(spec["domain"])
    lam = float(spec.get("lambda", 1.0))
    dens = None if lam == 1.0 else powered_ball_density(dom.n, lam)
    return MomentMeasure(dom, dens, engine, samples, seed)


def _check_moments(p: dict, seed: int) -> dict:
    m = _measure(p, seed, int(p.get("samples", 1_000_000)), p.get("engine", "mc"))
    r = moment_identity_residual(m, float(p.get("lambda", 1.0)), int(p.get("max_degree", 4)))
    return {
        "worst_sigma": r.worst_sigma,
        "worst_relative_diagonal": r.worst_relative_diagonal,
        "worst_offdiagonal": r.worst_offdiagonal,
        "hermitian_defect_sigma": r.table.hermitian_defect(),
    }


def kernel_equality_check(K_a, K_b, points: np.ndarray, partners: np.ndarray | None = None) -> float:
    """max |K_a - K_b| / (1 + |K_b|) over the sample pairs (points on the diagonal if no partners)."""
    w = points if partners is None else partners
    a = K_a(points, w)
    b = K_b(points, w)
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))


def _check_kernel_equality(p: dict, seed: int) -> dict:
    case = p["case"]
    samples = int(p.get("samples", 100))
    if case == "slit-restriction":
        D = slit_ball(2)
        K = RestrictedKernel(BallKernel(2), D)
        z, w = D.sample(samples, seed), D.sample(samples, seed + 1)
        return {"gap": kernel_equality_check(K, BallKernel(2), z, w)}
    if case == "hartogs-gram":
        deg = int(p.get("degree", 10))
        D = hartogs_removed_ball(2, float(p.get("eps", 0.01)))
        G = gram_kernel_estimate(D, monomial_dictionary(2, deg), degree=2 * deg)
        z, w = D.sample(samples, seed), D.sample(samples, seed + 1)
        series = SeriesKernel(CoefficientTable.build(2, 1.0, deg))
        rho = float(p.get("closed_form_radius", 0.3))
        zs = z * np.minimum(1.0, rho / np.linalg.norm(z, axis=1))[:, None]
        ws = w * np.minimum(1.0, rho / np.linalg.norm(w, axis=1))[:, None]
        return {
            "gap_truncated": kernel_equality_check(G, series, z, w),
            "gap_closed_form": kernel_equality_check(G, BallKernel(2), zs, ws),
            "eigen_ratio": G.eigen_ratio,
        }
    if case == "annulus-gram-vs-disk":
        r = float(p.get("r", 0.5))
        G = gram_kernel_estimate(annulus(r), laurent_dictionary(p.get("kmin", -10), p.get("kmax", 10)),
                                 degree=int(p.get("degree", 40)))
        rad = float(p.get("radius", 0.6))
        rng = np.random.default_rng(seed)
        z = rad * np.exp(2j * np.pi * rng.random((samples, 1)))
        return {"gap": kernel_equality_check(G, BallKernel(1), z)}
    raise ParameterError(f"unknown kernel-equality case {case!r}")


def _check_stirling(p: dict, seed: int) -> dict:
    mu, m = float(p["mu"]), int(p.get("m", 200))
    seq = stirling_ratio_sequence(mu, m)
    return {
        "error": float(abs(seq[-1] - math.exp(-mu))),
        "monotone_violations": int(np.sum(np.diff(seq) > 0)),
    }


def _check_support_reach(p: dict, seed: int) -> dict:
    m = int(p.get("m_max", 200))
    if p.get("closed_form"):
        return {"estimate": support_reach_estimate(None, m, lam=float(p.get("lambda", 1.0)), n=int(p["n"]))}
    meas = _measure(p, seed, 0, "quadrature")
    return {"estimate": support_reach_estimate(meas, m)}


def _check_closed_form(p: dict, seed: int) -> dict:
    claim = p["claim"]
    if claim == "even-moment":
        lam, n = float(p.get("lambda", 1.0)), int(p.get("n", 1))
        meas = MomentMeasure(ball(n), None if lam == 1 else powered_ball_density(n, lam))
        worst = 0.0
        for m in range(1, int(p.get("m_max", 5)) + 1):
            est = meas.integrate(lambda w: np.real(w[:, 0]) ** (2 * m), degree=2 * m + 2).value
            worst = max(worst, abs(est.real / even_moment_closed_form(m, lam, n) - 1.0))
        return {"relative_error": worst}
    if claim == "ellipsoid":
        rng = np.random.default_rng(seed)
        law = const = inside = 0.0
        for k in range(int(p.get("samples", 200))):
            n = (1, 2, 3)[k % 3]
            A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            H = A @ A.conj().T + 0.2 * np.eye(n)
            form = HermitianForm(H)
            L = ellipsoid_normalizer(form)
            KE = EllipsoidKernel(form)
            # interior points: near the boundary 1 - q loses digits, not the identity
            zeta = float(p.get("shrink", 0.95)) * L.source.sample(1, int(rng.integers(2**63)))
            lhs = KE(zeta, zeta)
            w = L(zeta)
            inside = max(inside, float(np.sum(np.abs(w) ** 2)) - 1.0)
            rhs = np.abs(L.jacobian_det(zeta)) ** 2 * BallKernel(n)(w, w)
            law = max(law, float(np.max(np.abs(lhs - rhs) / np.abs(lhs))))
            C = math.factorial(n) / math.pi**n * form.det / (n + 1) ** n
            const = max(const, abs(KE.constant / C - 1.0),
                        abs(np.abs(L.jacobian_det(zeta)[0]) ** 2 * math.factorial(n) / math.pi**n / C - 1.0))
        return {"law_residual": law, "constant_residual": const, "normalizer_overshoot": inside}
    raise ParameterError(f"unknown closed-form claim {claim!r}")


def _check_map_identity(p: dict, seed: int) -> dict:
    claim = p["claim"]
    rng = np.random.default_rng(seed)
    if claim == "family":
        n = int(p["n"])
        m = n - 1
        worst = 0.0
        escape = 0
        slit = 0.0
        law = 0.0
        for k in range(int(p.get("maps", 5))):
            a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            a *= 0.9 * rng.random() / np.linalg.norm(a)
            U = random_unitary(m, rng)
            A = BallAutomorphism(a, U)
            zp = ball(m).sample(int(p.get("points", 200)), int(rng.integers(2**63)))
            worst = max(worst, float(np.max(determinant_identity_residual(A, zp))))
            phi = family_5_3(A)
            z = ball(n).sample(int(p.get("ball_samples", 1000)), int(rng.integers(2**63)))
            img = phi(z)
            escape += int(np.sum(np.sum(np.abs(img) ** 2, axis=1) >= 1.0))
            flat = z.copy()
            flat[:, -1] = 0
            slit = max(slit, float(np.max(np.abs(phi(flat)[:, -1]))))
            w = ball(n).sample(50, int(rng.integers(2**63)))
            law = max(law, transformation_law_residual(phi, BallKernel(n), BallKernel(n), z[:50], w))
        return {"determinant_identity": worst, "ball_escapes": escape, "slit_image": slit, "kernel_law": law}
    if claim == "mobius":
        j = np.arange(1, int(p.get("orbit_length", 1000)) + 1)
        orbit = np.array([ball_automorphism_5_1(1 - 1 / k, np.zeros((1, 2)))[0] for k in j])
        z = slit_ball(2).sample(200, seed)
        flat = z.copy()
        flat[:, 1] = 0
        F = ball_automorphism_5_1(complex(p.get("a", 0.5)))
        w = slit_ball(2).sample(200, seed + 1)
        return {
            "orbit_distance": float(np.linalg.norm(orbit[-1] - np.array([1.0, 0.0]))),
            "slit_image": float(np.max(np.abs(F(flat)[:, 1]))),
            "kernel_law": transformation_law_residual(F, BallKernel(2), BallKernel(2), z, w),
            "ball_escapes": int(np.sum(np.sum(np.abs(F(z)) ** 2, axis=1) >= 1.0)),
        }
    raise ParameterError(f"unknown map-identity claim {claim!r}")


def _check_isometry(p: dict, seed: int) -> dict:
    n = int(p.get("n", 2))
    K = BallKernel(n)
    B = ball(n)
    z = B.sample(int(p.get("samples", 1000)), seed)
    T0 = rep_coords_map(K, np.zeros(n))
    identity_err = float(np.max(np.abs(T0(z) - z)))
    p0 = B.sample(1, seed + 1)[0] * float(p.get("base_scale", 0.7))
    T = rep_coords_map(K, p0)
    at_p = float(np.max(np.abs(T(p0[None]))))
    outside = int(np.sum(~T.target.contains(T(z))))
    KE = EllipsoidKernel(bergman_metric(K, p0).g)
    iso = max(isometry_residual(T, K, KE, x) for x in z[: int(p.get("isometry_points", 50))])
    return {"identity_error": identity_err, "base_point_image": at_p, "outside_ellipsoid": outside,
            "isometry_residual": iso}


_HANDLERS = {
    "curvature-constancy": _check_curvature,
    "moment-identity": _check_moments,
    "kernel-equality": _check_kernel_equality,
    "stirling-limit": _check_stirling,
    "support-reach": _check_support_reach,
    "closed-form": _check_closed_form,
    "map-identity": _check_map_identity,
    "isometry": _check_isometry,
}


# running ----------------------------------------------------------------------------

@dataclass
class ScenarioResult:
    name: str
    kind: str
    negative_control: bool
    seed: int
    observed: dict
    checks: list
    positive_checks: list
    passed: bool
    margin: float
    error: str | None = None
    wall_clock: float = 0.0

    @property
    def positive_check_passed(self) -> bool | None:
        if not self.positive_checks:
            return None
        return all(c["ok"] for c in self.positive_checks)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "kind": self.kind, "negative_control": self.negative_control,
            "seed": self.seed, "passed": self.passed, "margin": self.margin,
            "positive_check_passed": self.positive_check_passed, "observed": self.observed,
            "checks": self.checks, "positive_checks": self.positive_checks, "error": self.error,
        }


def _evaluate(exps, observed: dict) -> list:
    out = []
    for e in exps:
        value = observed.get(e.statistic, math.nan)
        value = float(value) if value is not None else math.nan
        out.append({**e.to_dict(), "value": value, "ok": e.holds(value), "margin": e.margin(value)})
    return out


def run_scenario(s: Scenario, master_seed: int = DEFAULT_SEED) -> ScenarioResult:
    """Run one scenario deterministically; library errors are recorded, not raised."""
    seed = scenario_seed(master_seed, s.name)
    t0 = time.perf_counter()
    error = None
    try:
        observed = _HANDLERS[s.kind](s.params, seed)
    except BergmanLabError as exc:
        observed, error = {}, f"{type(exc).__name__}: {exc}"
    except KeyError as exc:
        observed, error = {}, f"ScenarioError: scenario {s.name!r} is missing parameter {exc.args[0]!r}"
    checks = _evaluate(s.expected, observed)
    positive = _evaluate(s.positive, observed)
    passed = error is None and all(c["ok"] for c in checks)
    if s.negative_control and positive and all(c["ok"] for c in positive):
        passed = False
    margin = min(c["margin"] for c in checks)
    return ScenarioResult(s.name, s.kind, s.negative_control, seed, observed, checks, positive, passed,
                          float(margin), error, time.perf_counter() - t0)


@dataclass
class VerificationReport:
    master_seed: int
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "master_seed": self.master_seed,
            "passed": self.passed,
            "scenarios": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def timings(self) -> dict:
        return {"schema": SCHEMA_VERSION, "wall_clock_seconds": {r.name: r.wall_clock for r in self.results}}

    def table(self) -> str:
        rows = [("scenario", "kind", "role", "result", "margin")]
        for r in self.results:
            role = "negative" if r.negative_control else "positive"
            verdict = "PASS" if r.passed else ("ERROR" if r.error else "FAIL")
            rows.append((r.name, r.kind, role, verdict, f"{r.margin:.3g}"))
        widths = [max(len(row[i]) for row in rows) for i in range(5)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append(f"{sum(r.passed for r in self.results)}/{len(self.results)} scenarios passed")
        return "\n".join(lines)


def run_suite(scenarios, master_seed: int = DEFAULT_SEED, workers: int | None = None) -> VerificationReport:
    """Run scenarios on a thread pool and merge results in registry order.

    Each scenario draws from its own derived seed, so the report does not
    depend on scheduling. ``workers=1`` runs serially.
    """
    scenarios = list(scenarios)
    if workers is None:
        workers = min(8, os.cpu_count() or 1)
    if workers <= 1 or len(scenarios) <= 1:
        results = [run_scenario(s, master_seed) for s in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: run_scenario(s, master_seed), scenarios))
    return VerificationReport(int(master_seed), results)


# built-in registry ------------------------------------------------------------------

def _e(stat, rel, bound, prov):
    return Expectation(stat, rel, float(bound), prov)


_BALL_H = "published: the ball has constant holomorphic sectional curvature -2/(n+1)"


def built_in_suite() -> list[Scenario]:
    """The stable registry covering every acceptance criterion."""
    S = []
    for n in (1, 2, 3):
        S.append(Scenario(
            f"ball-curvature-n{n}", "curvature-constancy",
            {"kernel": {"kind": "ball", "n": n}, "domain": {"kind": "ball", "n": n}, "samples": 50,
             "max_norm": 0.7, "engines": ["analytic", "fd"], "value": -2.0 / (n + 1)},
            (_e("max_error_analytic", "<=", 1e-6, _BALL_H), _e("max_error_fd", "<=", 1e-5, _BALL_H),
             _e("spread_analytic", "<=", 1e-6, _BALL_H)),
            description="curvature anchor with the analytic metric and with pure finite differences",
        ))
    S.append(Scenario(
        "slit-curvature-d1", "curvature-constancy",
        {"kernel": {"kind": "ball", "n": 2, "domain": "slit"}, "domain": {"kind": "slit", "n": 2},
         "samples": 50, "min_last_coordinate": 0.05, "engines": ["cauchy"], "value": -2.0 / 3.0},
        (_e("max_error", "<=", 1e-6, "published: the slit ball has curvature -2/3"),
         _e("spread", "<=", 1e-6, "published: the slit ball has curvature -2/3")),
        description="restricted ball kernel, stencils kept inside the slit ball",
    ))
    S.append(Scenario(
        "d2-curvature-transport", "curvature-constancy",
        {"kernel": {"kind": "pullback-d2", "n": 2}, "domain": {"kind": "d2", "n": 2}, "samples": 50,
         "engines": ["cauchy"], "value": -2.0 / 3.0, "roundtrip_samples": 1000},
        (_e("max_error", "<=", 1e-5, "published: the quartic domain is biholomorphic to the slit ball"),
         _e("roundtrip_error", "<=", 1e-14, "trivial: algebraic inverse")),
    ))
    for n in (2, 3):
        S.append(Scenario(
            f"family-identity-n{n}", "map-identity", {"claim": "family", "n": n, "points": 200},
            (_e("determinant_identity", "<=", 1e-10, "derived: Jacobian determinant of a ball automorphism"),
             _e("ball_escapes", "<=", 0, "published: the family preserves the unit ball"),
             _e("slit_image", "<=", 0, "published: the family preserves the removed hyperplane"),
             _e("kernel_law", "<=", 1e-10, "derived: transformation law under ball automorphisms")),
        ))
    S.append(Scenario(
        "mobius-orbit-d1", "map-identity", {"claim": "mobius", "orbit_length": 1000, "a": 0.5},
        (_e("orbit_distance", "<=", 2e-3, "published: the orbit accumulates at (1, 0)"),
         _e("slit_image", "<=", 0, "published: the maps preserve the slit"),
         _e("kernel_law", "<=", 1e-10, "derived: transformation law under ball automorphisms"),
         _e("ball_escapes", "<=", 0, "trivial: automorphisms of the ball")),
    ))
    mom = "derived: orthonormal-basis moment identity"
    for n in (1, 2):
        for lam in (1, 2):
            tag = f"moment-identity-ball-n{n}" + ("" if lam == 1 else "-lam2")
            S.append(Scenario(
                tag, "moment-identity",
                {"domain": {"kind": "ball", "n": n}, "lambda": lam, "samples": 1_000_000, "max_degree": 4},
                (_e("worst_sigma", "<=", 3, mom), _e("hermitian_defect_sigma", "<=", 3, "trivial: conjugation")),
            ))
    S.append(Scenario(
        "moment-identity-slit-d1", "moment-identity",
        {"domain": {"kind": "slit", "n": 2}, "lambda": 1, "samples": 1_000_000, "max_degree": 4},
        (_e("worst_sigma", "<=", 3, "published: the slit has measure zero"),),
    ))
    S.append(Scenario(
        "moment-shrunken-ball", "moment-identity",
        {"domain": {"kind": "scaled-ball", "n": 1, "radius": 0.9}, "lambda": 1, "samples": 1_000_000,
         "max_degree": 4},
        (_e("worst_sigma", ">", 3, "derived: diagonal moments scale by 0.9^(2|a|+2)"),),
        negative_control=True, positive=(_e("worst_sigma", "<=", 3, mom),),
    ))
    S.append(Scenario(
        "even-moment-closed-form", "closed-form", {"claim": "even-moment", "m_max": 5, "n": 1},
        (_e("relative_error", "<=", 1e-6, "derived: binomial expansion of the diagonal moments"),),
    ))
    for mu in (2, 3, 4):
        S.append(Scenario(
            f"stirling-mu{mu}", "stirling-limit", {"mu": mu, "m": 200},
            (_e("error", "<=", 0.02, "published: (m/(mu+m))^m tends to exp(-mu)"),
             _e("monotone_violations", "<=", 0, "derived: the sequence decreases")),
        ))
    S.append(Scenario(
        "support-reach-ball", "support-reach", {"closed_form": True, "n": 1, "lambda": 1, "m_max": 200},
        (_e("estimate", ">=", 0.95, "derived: root test on closed-form even moments"),),
    ))
    S.append(Scenario(
        "support-reach-shrunken", "support-reach",
        {"domain": {"kind": "scaled-ball", "n": 1, "radius": 0.8}, "m_max": 200},
        (_e("estimate", "<=", 0.82, "derived: scaling of the moments"),),
    ))
    S.append(Scenario(
        "slit-kernel-restriction", "kernel-equality", {"case": "slit-restriction", "samples": 100},
        (_e("gap", "<=", 0.0, "published: the slit ball kernel is the restricted ball kernel"),),
    ))
    S.append(Scenario(
        "hartogs-kernel-equality", "kernel-equality",
        {"case": "hartogs-gram", "degree": 10, "eps": 0.01, "samples": 100},
        (_e("gap_truncated", "<=", 1e-8, "published: the removed compact set is negligible"),
         _e("gap_closed_form", "<=", 1e-8, "published: the removed compact set is negligible")),
    ))
    S.append(Scenario(
        "annulus-curvature", "curvature-constancy",
        {"kernel": {"kind": "annulus", "r": 0.05}, "domain": {"kind": "annulus", "n": 1, "r": 0.05},
         "samples": 100, "engines": ["cauchy"]},
        (_e("spread", ">", 0.1, "derived: annulus kernel series"),),
        negative_control=True, positive=(_e("spread", "<=", 1e-6, "derived: constancy check"),),
        description="inner radius 0.05; at radius 0.5 the curvature is within 1e-9 of -1",
    ))
    S.append(Scenario(
        "annulus-gram-vs-disk", "kernel-equality",
        {"case": "annulus-gram-vs-disk", "r": 0.5, "radius": 0.6, "samples": 20},
        (_e("gap", ">", 0.05, "derived: annulus and disk closed forms"),),
        negative_control=True, positive=(_e("gap", "<=", 1e-8, "derived: kernel equality check"),),
    ))
    S.append(Scenario(
        "ellipsoid-consistency", "closed-form", {"claim": "ellipsoid", "samples": 200, "shrink": 0.95},
        (_e("law_residual", "<=", 1e-12, "derived: transformation law under the normalizer"),
         _e("constant_residual", "<=", 1e-12, "derived: |det J|^2 = det H / (n+1)^n"),
         _e("normalizer_overshoot", "<=", 0.0, "derived: the normalizer maps into the ball")),
    ))
    S.append(Scenario(
        "repcoords-isometry-ball", "isometry", {"n": 2, "samples": 1000, "isometry_points": 50},
        (_e("identity_error", "<=", 1e-8, "derived: representative coordinates at the origin"),
         _e("base_point_image", "<=", 0.0, "published: the map sends p to 0"),
         _e("outside_ellipsoid", "<=", 0, "published: the image lies in the ellipsoid"),
         _e("isometry_residual", "<=", 1e-6, "published: local isometry onto the ellipsoid")),
    ))
    return S


def suite_by_name(names=None) -> list[Scenario]:
    suite = built_in_suite()
    if not names:
        return suite
    index = {s.name: s for s in suite}
    unknown = [n for n in names if n not in index]
    if unknown:
        raise ScenarioError(f"unknown scenario names {unknown}", missing=unknown)
    return [index[n] for n in names]
