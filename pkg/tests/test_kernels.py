import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergmanlab.domains import annulus, ball, hartogs_removed_ball
from bergmanlab.errors import ConditioningError, DomainError, ParameterError, SingularityError
from bergmanlab.kernels import (
    AnnulusKernel,
    BallKernel,
    BasisDictionary,
    CoefficientTable,
    EllipsoidKernel,
    GramKernel,
    PoweredKernel,
    SeriesKernel,
    annulus_kernel,
    ball_kernel,
    deriv_power_kernel,
    ellipsoid_kernel,
    gram_kernel_estimate,
    gram_matrix,
    hermitian_defect,
    laurent_dictionary,
    monomial_dictionary,
    powered_kernel,
    series_kernel,
    series_tail_bound,
    transformation_law_residual,
    truncation_degree,
)
from bergmanlab.maps import ellipsoid_normalizer, identity_map, random_unitary, unitary_map
from conftest import random_ball_points

# closed forms ---------------------------------------------------------------------


def test_ball_kernel_values():
    assert ball_kernel(1, [0], [0]) == pytest.approx(0.31831, abs=1e-5)
    assert ball_kernel(2, [0, 0], [0, 0]) == pytest.approx(0.20264, abs=1e-5)
    assert ball_kernel(1, [0.5], [0.5]) == pytest.approx(16 / (9 * math.pi), rel=1e-15)


def test_ball_kernel_boundary_contact_is_singular():
    with pytest.raises(SingularityError):
        ball_kernel(1, [2.0], [0.5])
    with pytest.raises(DomainError):
        ball_kernel(1, [1.0], [0.2])


def test_powered_kernel_values():
    assert powered_kernel(1, None, [0], [0]) == pytest.approx(1 / math.pi)
    assert powered_kernel(2, None, [0], [0]) == pytest.approx(1 / math.pi**2)
    z = np.array([0.5, 0.0])
    val = powered_kernel(1, lambda w: w[..., 0], z, z)
    assert val == pytest.approx(0.25 * ball_kernel(2, z, z), rel=1e-14)


def test_powered_kernel_rejects_nonpositive_power():
    with pytest.raises(ParameterError):
        powered_kernel(0, None, [0], [0])
    with pytest.raises(ParameterError):
        PoweredKernel(1, -1.0)


def test_deriv_power_kernel_values():
    assert deriv_power_kernel((1,), 1, 1, [0.3]) == pytest.approx(0.19099, abs=1e-5)
    assert deriv_power_kernel((2,), 1, 1, [0.3]) == pytest.approx(0.17189, abs=1e-5)
    assert deriv_power_kernel((1, 2), 1.5, 2, [0, 0]) == 0


def test_deriv_power_kernel_matches_finite_difference():
    # d/dz K(z, w) at z = 0 for the disk kernel, w = 0.3
    h = 1e-5
    fd = (ball_kernel(1, [h], [0.3]) - ball_kernel(1, [-h], [0.3])) / (2 * h)
    assert deriv_power_kernel((1,), 1, 1, [0.3]) == pytest.approx(fd, rel=1e-9)


def test_series_kernel_matches_closed_form():
    t = CoefficientTable.build(1, 1, 60)
    assert series_kernel(t, None, 60, [0.5], [0.5]) == pytest.approx(16 / (9 * math.pi), abs=1e-8)
    z = np.array([0.3, 0.4])
    t2 = CoefficientTable.build(2, 1, 40)
    assert series_kernel(t2, None, 40, z, z) == pytest.approx(ball_kernel(2, z, z), abs=1e-8)


def test_series_kernel_degree_zero():
    t = CoefficientTable.build(1, 1, 0)
    assert series_kernel(t, None, 0, [0], [0]) == pytest.approx(1 / math.pi, rel=1e-15)


def test_coefficient_table_json_round_trip():
    t = CoefficientTable.build(2, 1.5, 4)
    u = CoefficientTable.from_json(t.to_json())
    assert u.n == 2 and u.lam == 1.5 and u.degree == 4
    assert u.coeffs == pytest.approx(t.coeffs, rel=1e-15)


@given(st.integers(1, 3), st.sampled_from([1.0, 2.0]), st.floats(0.1, 0.8))
def test_truncation_degree_meets_tolerance(n, lam, rho):
    tol = 1e-9
    N = truncation_degree(n, lam, rho, tol)
    z = np.zeros(n, complex)
    z[0] = rho
    S = SeriesKernel(CoefficientTable.build(n, lam, N))
    exact = PoweredKernel(n, lam)(z[None], z[None])[0]
    assert abs(S(z[None], z[None])[0] - exact) <= tol
    assert series_tail_bound(n, lam, rho, N) <= 0.5 * tol


def test_annulus_coefficients():
    assert AnnulusKernel(0.5).coefficient(0) == pytest.approx(1 / (0.75 * math.pi), rel=1e-14)
    assert AnnulusKernel(0.5).coefficient(0) == pytest.approx(0.42441, abs=1e-5)


def test_annulus_tends_to_disk_kernel():
    disk = 1 / (math.pi * 0.75**2)
    gaps = [abs(annulus_kernel(r, [0.5], [0.5]) - disk) for r in (1e-4, 1e-40, 1e-300)]
    assert gaps == sorted(gaps, reverse=True)
    assert gaps[-1] < 3e-3


def test_annulus_hermitian_symmetry():
    a = annulus_kernel(0.5, [0.6], [0.7j])
    b = annulus_kernel(0.5, [0.7j], [0.6])
    assert a == pytest.approx(np.conj(b), rel=1e-14)


def test_annulus_domain_error():
    with pytest.raises(DomainError):
        annulus_kernel(0.5, [0.4], [0.6])


def test_ellipsoid_kernel_values():
    for n in (1, 2, 3):
        val = ellipsoid_kernel((n + 1) * np.eye(n), np.zeros(n))
        assert val == pytest.approx(math.factorial(n) / math.pi**n, rel=1e-14)
    assert ellipsoid_kernel(np.array([[4.0]]), [0]) == pytest.approx(2 / math.pi, rel=1e-14)
    assert ellipsoid_kernel(np.array([[4.0]]), [0.5]) == pytest.approx(8 / math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        ellipsoid_kernel(np.array([[4.0]]), [0.8])


def test_ellipsoid_constant():
    H = np.array([[2.0, 1j], [-1j, 2.0]])
    assert EllipsoidKernel(H).constant == pytest.approx(2 / math.pi**2 * 3 / 9, rel=1e-14)


# transformation law ---------------------------------------------------------------


def test_transformation_law_identity():
    z, w = np.array([0.3, 0.2j]), np.array([-0.1, 0.4])
    assert transformation_law_residual(identity_map(2), BallKernel(2), BallKernel(2), z, w) == 0.0


@given(st.integers(1, 3), st.integers(0, 2**31))
def test_transformation_law_unitary(n, seed):
    rng = np.random.default_rng(seed)
    U = random_unitary(n, rng)
    z, w = random_ball_points(rng, 2, n, 0.9)
    assert transformation_law_residual(unitary_map(U), BallKernel(n), BallKernel(n), z, w) <= 1e-12


def test_transformation_law_ellipsoid_normalizer():
    H = np.array([[2.0, 1j], [-1j, 2.0]])
    z, w = np.array([0.15, 0.1j]), np.array([-0.05, 0.2])
    res = transformation_law_residual(ellipsoid_normalizer(H), EllipsoidKernel(H), BallKernel(2), z, w)
    assert res <= 1e-12


def test_transformation_law_detects_leaving_target():
    U = np.eye(2)
    with pytest.raises(DomainError):
        transformation_law_residual(unitary_map(U), BallKernel(2), BallKernel(2), [0.9, 0.9], [0, 0])


@given(st.integers(0, 2**31))
def test_hermitian_symmetry_of_closed_forms(seed):
    rng = np.random.default_rng(seed)
    z, w = random_ball_points(rng, 2, 2, 0.9)
    assert hermitian_defect(BallKernel(2), z[None], w[None]) <= 1e-14
    assert hermitian_defect(PoweredKernel(2, 1.7), z[None], w[None]) <= 1e-14
    a, b = (0.55 + 0.4 * rng.uniform(size=2)) * np.exp(2j * np.pi * rng.uniform(size=2))
    assert hermitian_defect(AnnulusKernel(0.5), np.array([[a]]), np.array([[b]])) <= 1e-13


# Gram estimates -------------------------------------------------------------------


def test_monomials_are_orthogonal_on_the_ball():
    G = gram_matrix(ball(2), monomial_dictionary(2, 6), degree=14)
    d = np.sqrt(np.real(np.diag(G)))
    np.testing.assert_allclose(G / np.outer(d, d), np.eye(len(d)), atol=1e-10)


def test_gram_on_ball_equals_series_kernel():
    K = gram_kernel_estimate(ball(2), monomial_dictionary(2, 6), degree=14)
    S = SeriesKernel(CoefficientTable.build(2, 1, 6))
    rng = np.random.default_rng(1)
    z = random_ball_points(rng, 20, 2, 0.8)
    w = random_ball_points(rng, 20, 2, 0.8)
    np.testing.assert_allclose(K(z, w), S(z, w), atol=1e-10)


def test_gram_on_hartogs_removed_ball_equals_full_ball():
    D = monomial_dictionary(2, 6)
    a = gram_matrix(ball(2), D, degree=14)
    b = gram_matrix(hartogs_removed_ball(2, 0.01), D, degree=14)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_laurent_gram_on_annulus_matches_closed_form():
    K = gram_kernel_estimate(annulus(0.5), laurent_dictionary(-10, 10), degree=30)
    x = np.array([[0.6], [0.7j], [-0.8]])
    ref = AnnulusKernel(0.5, -10, 10)(x, x)
    np.testing.assert_allclose(K(x, x), ref, rtol=1e-12)


def test_monte_carlo_gram_is_seeded():
    D = monomial_dictionary(1, 3)
    a = gram_matrix(ball(1), D, engine="mc", samples=20_000, seed=9)
    b = gram_matrix(ball(1), D, engine="mc", samples=20_000, seed=9)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(np.diag(a).real, [math.pi / (k + 1) for k in range(4)], rtol=0.05)


def test_duplicate_dictionary_is_ill_conditioned():
    def evaluate(z):
        z1 = np.asarray(z)[..., 0]
        return np.stack([np.ones_like(z1), z1, z1], axis=-1)

    D = BasisDictionary(1, evaluate, 3)
    with pytest.raises(ConditioningError) as info:
        gram_kernel_estimate(ball(1), D, degree=8)
    assert info.value.ratio < 1e-10
    with pytest.raises(ConditioningError):
        GramKernel(D, np.diag([1.0, 1.0, 1e-12]))
