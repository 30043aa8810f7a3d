import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergmanlab.domains import (
    annulus,
    ball,
    builtin_domain,
    ellipsoid,
    hartogs_removed_ball,
    quartic_domain,
    slit_ball,
    unitary_image,
)
from bergmanlab.errors import ParameterError, SamplingError
from bergmanlab.quadrature import ball_rule, ball_volume, monte_carlo, quadrature


def test_ball_membership():
    B = ball(2)
    assert np.array([0.5, 0.5j]) in B
    assert np.array([0.8, 0.7]) not in B


def test_slit_excludes_hyperplane():
    D = slit_ball(2)
    assert np.array([0.1, 0.2]) in D
    assert np.array([0.1, 0.0]) not in D


def test_quartic_domain_example_point():
    # image of (0.5, 0.5): 0.0625 + 0.25 * (0.25 - 1) = -0.125 < 0
    assert np.array([0.25, 0.5]) in quartic_domain(2)
    assert np.array([0.25, 0.0]) not in quartic_domain(2)


def test_hartogs_set_removed():
    D = hartogs_removed_ball(2, 0.01)
    assert np.array([0.05, 0.05]) not in D
    assert np.array([0.05, 0.05 + 1e-9j]) in D
    assert np.array([0.5, 0.05]) in D


def test_annulus_membership_and_radius_check():
    A = annulus(0.5)
    assert np.array([0.6]) in A
    assert np.array([0.4j]) not in A
    with pytest.raises(ParameterError):
        annulus(1.5)


def test_ellipsoid_disk_radius():
    E = ellipsoid(np.array([[4.0]]))
    assert np.array([0.7]) in E
    assert np.array([0.71]) not in E


def test_unitary_image_of_ball_is_ball():
    U = np.array([[0, 1], [1j, 0]])
    D = unitary_image(slit_ball(2), U)
    assert np.array([0.3, 0.1]) in D  # preimage (-0.1j, 0.3)
    assert np.array([0.0, 0.3]) not in D  # preimage (..., 0) lies on the slit


def test_builtin_domain_lookup():
    assert builtin_domain("ball", 3).n == 3
    with pytest.raises(ParameterError):
        builtin_domain("torus", 2)


def test_volumes():
    assert ball_volume(1) == pytest.approx(math.pi)
    assert ball_volume(2) == pytest.approx(math.pi**2 / 2)
    assert ellipsoid(np.array([[4.0]])).volume == pytest.approx(math.pi / 2)


def test_ball_rule_integrates_polynomials_exactly():
    # int_{B^1} |z|^{2k} dm = pi / (k + 1)
    rule = ball_rule(1, 12)
    for k in range(6):
        est = quadrature(rule, lambda z: np.abs(z[:, 0]) ** (2 * k))
        assert est.value == pytest.approx(math.pi / (k + 1), rel=1e-13)


def test_ball_rule_volume_n2():
    rule = ball_rule(2, 4)
    assert quadrature(rule, lambda z: np.ones(len(z))).value == pytest.approx(math.pi**2 / 2, rel=1e-13)


def test_quartic_rule_volume():
    # vol D_2 = int_{B^2} |z_2|^2 dm = pi^2 / 6
    est = quartic_domain(2).integrate(lambda w: np.ones(len(w)), degree=4)
    assert est.value.real == pytest.approx(math.pi**2 / 6, rel=1e-12)


def test_ellipsoid_rule_volume():
    H = np.array([[2.0, 1j], [-1j, 2.0]])
    E = ellipsoid(H)
    est = E.integrate(lambda z: np.ones(len(z)), degree=2)
    assert est.value.real == pytest.approx(E.volume, rel=1e-12)
    assert np.all(E.contains(E.quadrature(6).nodes))


def test_monte_carlo_volume_within_stderr():
    est = monte_carlo(ball(2), lambda z: np.ones(len(z)), 200_000, seed=3)
    assert abs(est.value - math.pi**2 / 2) < 4 * est.stderr + 1e-12


def test_monte_carlo_is_deterministic():
    f = lambda z: z[:, 0] * np.conj(z[:, 1])  # noqa: E731
    a = monte_carlo(ball(2), f, 10_000, seed=5)
    b = monte_carlo(ball(2), f, 10_000, seed=5)
    assert a.value == b.value and a.stderr == b.stderr


def test_monte_carlo_rejects_everything():
    empty = ball(1)
    empty = type(empty)(name="empty", n=1, contains=lambda z: np.zeros(len(z), bool), radius=1.0)
    with pytest.raises(SamplingError):
        monte_carlo(empty, lambda z: np.ones(len(z)), 100, seed=0)


@given(st.integers(1, 3), st.integers(0, 2**31))
def test_samples_lie_in_domain(n, seed):
    D = ball(n, radius=0.8)
    pts = D.sample(200, seed)
    assert pts.shape == (200, n)
    assert np.all(np.linalg.norm(pts, axis=1) < 0.8)


@pytest.mark.parametrize("D", [ball(2), slit_ball(2), quartic_domain(2), hartogs_removed_ball(2),
                               ellipsoid(np.array([[2.0, 1j], [-1j, 2.0]])), annulus(0.5)],
                         ids=lambda d: d.name)
def test_sampler_contract(D):
    a = D.sample(100_000, 42)
    assert a.shape == (100_000, D.n)
    assert np.all(D.contains(a))
    np.testing.assert_array_equal(a, D.sample(100_000, 42))
