import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from care.compositional import (
    ZeroPattern,
    alr_to_clr_covariance,
    alr_transform,
    basis_to_clr_covariance,
    basis_to_compositional_precision,
    center_matrix,
    check_composition,
    closure,
    clr_transform,
    compositional_precision_from_covariance,
    ipw_alr_covariance,
    sample_clr_covariance,
    zero_replace_vc,
)
from care.exceptions import (
    EmptySample,
    InsufficientSamples,
    InvalidDimension,
    InvalidInput,
    InvalidParameter,
    NotPositiveDefinite,
    NotStrictlyPositive,
)

from oracles import center, eq1_four_terms, naive_covariance, pinv_eigh, random_spd

seeds = st.integers(0, 2**32 - 1)


# -- transforms ---------------------------------------------------------------


def test_clr_uniform_row():
    np.testing.assert_allclose(clr_transform([[1 / 3, 1 / 3, 1 / 3]]), [[0, 0, 0]], atol=1e-15)


def test_clr_log_linear_row():
    x = closure(np.exp([[2.0, 1.0, 0.0]]))
    np.testing.assert_allclose(clr_transform(x), [[1, 0, -1]], atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 30), st.integers(1, 20))
def test_clr_rows_sum_to_zero(seed, p, n):
    x = closure(np.random.default_rng(seed).uniform(1e-6, 1.0, size=(n, p)))
    z = clr_transform(x)
    assert np.all(np.abs(z.sum(axis=1)) <= 1e-10 * p)


def test_clr_rejects_zero():
    with pytest.raises(NotStrictlyPositive):
        clr_transform([[0.5, 0.5, 0.0]])


def test_check_composition_renormalizes_small_drift():
    x = check_composition([[0.2, 0.8 + 5e-7]])
    assert abs(x.sum() - 1) <= 1e-12
    with pytest.raises(InvalidInput):
        check_composition([[0.2, 0.9]])


def test_alr_reference_last():
    x = closure(np.array([[1.0, 2.0, 4.0]]))
    np.testing.assert_allclose(alr_transform(x), np.log([[0.25, 0.5]]))


# -- covariances --------------------------------------------------------------


def test_sample_clr_covariance_two_rows():
    z = np.array([[1.0, 0.0, -1.0], [-1.0, 0.0, 1.0]])
    np.testing.assert_allclose(sample_clr_covariance(z), [[1, 0, -1], [0, 0, 0], [-1, 0, 1]])


def test_sample_clr_covariance_identical_rows():
    z = np.tile([[0.5, -0.2, -0.3]], (4, 1))
    np.testing.assert_array_equal(sample_clr_covariance(z), np.zeros((3, 3)))


def test_sample_clr_covariance_needs_two_rows():
    with pytest.raises(InsufficientSamples):
        sample_clr_covariance(np.zeros((1, 3)))


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 8), st.integers(2, 15))
def test_sample_clr_covariance_matches_naive(seed, p, n):
    rng = np.random.default_rng(seed)
    z = clr_transform(closure(rng.uniform(0.01, 1, size=(n, p))))
    s = sample_clr_covariance(z)
    np.testing.assert_allclose(s, naive_covariance(z), atol=1e-12)
    assert np.max(np.abs(s.sum(axis=1))) <= 1e-12 * p
    assert np.linalg.eigvalsh(s).min() >= -1e-8


def test_center_matrix():
    np.testing.assert_allclose(center_matrix(2), [[0.5, -0.5], [-0.5, 0.5]])
    G = center_matrix(7)
    np.testing.assert_allclose(G @ np.ones(7), 0, atol=1e-15)
    np.testing.assert_allclose(G @ G, G, atol=1e-12)
    with pytest.raises(InvalidDimension):
        center_matrix(1)


# -- identities ---------------------------------------------------------------


def test_compositional_precision_identity_basis():
    np.testing.assert_allclose(basis_to_compositional_precision(np.eye(4)), center(4), atol=1e-15)


def test_compositional_precision_two_by_two():
    omega0 = np.array([[2.0, 1.0], [1.0, 2.0]])
    expected = np.array([[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_allclose(basis_to_compositional_precision(omega0), expected, atol=1e-14)
    sigma_c = basis_to_clr_covariance(np.linalg.inv(omega0))
    np.testing.assert_allclose(pinv_eigh(sigma_c), expected, atol=1e-12)
    np.testing.assert_allclose(compositional_precision_from_covariance(sigma_c), expected, atol=1e-8)


def test_compositional_precision_rejects_nonpositive_total():
    with pytest.raises(NotPositiveDefinite):
        basis_to_compositional_precision(np.array([[1.0, -1.0], [-1.0, 1.0]]) - np.eye(2))


def test_clr_covariance_examples():
    np.testing.assert_allclose(basis_to_clr_covariance(np.eye(3)), center(3), atol=1e-15)
    np.testing.assert_allclose(basis_to_clr_covariance(2.5 * np.ones((4, 4))), 0, atol=1e-14)


def test_clr_covariance_four_term_form():
    rng = np.random.default_rng(11)
    sigma0 = random_spd(rng, 4)
    np.testing.assert_allclose(basis_to_clr_covariance(sigma0), eq1_four_terms(sigma0), atol=1e-12)
    G = center(4)
    np.testing.assert_allclose(basis_to_clr_covariance(sigma0), G @ sigma0 @ G, atol=1e-12)


def test_compositional_precision_of_projection():
    np.testing.assert_allclose(compositional_precision_from_covariance(center(5)), center(5), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(3, 20))
def test_round_trip_and_precision_properties(seed, p):
    rng = np.random.default_rng(seed)
    omega0 = random_spd(rng, p, cond=rng.uniform(1.5, 50))
    sigma_c = basis_to_clr_covariance(np.linalg.inv(omega0))
    omega_c = compositional_precision_from_covariance(sigma_c)
    direct = basis_to_compositional_precision(omega0)
    G = center(p)
    assert np.max(np.abs(omega_c - direct)) <= 1e-7
    assert np.max(np.abs(sigma_c @ omega_c - G)) <= 1e-8
    assert np.max(np.abs(G @ omega_c - omega_c)) <= 1e-8
    assert np.max(np.abs(omega_c @ np.ones(p))) <= 1e-8
    lo, hi = np.linalg.eigvalsh(omega0)[[0, -1]]
    vals = np.linalg.eigvalsh(omega_c)
    pos = vals[1:]  # drop the null eigenvalue
    assert lo - 1e-8 <= pos.min() and pos.max() <= hi + 1e-8
    assert np.all(np.diag(sigma_c) * np.diag(omega_c) >= (1 - 1 / p) ** 2 - 1e-8)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(3, 20))
def test_identification_error_bounds(seed, p):
    rng = np.random.default_rng(seed)
    omega0 = random_spd(rng, p, cond=rng.uniform(1.5, 20))
    vals = np.linalg.eigvalsh(omega0)
    R = max(vals[-1], 1 / vals[0])
    M_p = np.abs(omega0).sum(axis=0).max()
    gap = np.max(np.abs(omega0 - basis_to_compositional_precision(omega0)))
    assert R**-3 / p - 1e-10 <= gap <= R * M_p**2 / p + 1e-10


def test_clr_equals_centered_basis():
    rng = np.random.default_rng(3)
    Y = rng.standard_normal((20, 6))
    X = closure(np.exp(Y))
    np.testing.assert_allclose(clr_transform(X), Y @ center(6), atol=1e-10)


# -- zero handling ------------------------------------------------------------


def test_vc_examples():
    np.testing.assert_allclose(zero_replace_vc([[0, 0]], allow_empty=True), [[0.5, 0.5]])
    np.testing.assert_allclose(zero_replace_vc([[1, 3]]), [[0.3, 0.7]])
    np.testing.assert_allclose(zero_replace_vc([[10, 0, 0]]), [[10.5 / 11.5, 0.5 / 11.5, 0.5 / 11.5]])


def test_vc_errors():
    with pytest.raises(InvalidInput):
        zero_replace_vc([[1, -1]])


def test_vc_empty_row():
    with pytest.raises(EmptySample):
        zero_replace_vc([[1, 2], [0, 0]])


def test_ipw_plain_moments_when_unweighted():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((9, 3))
    zp = ZeroPattern(np.ones((9, 3)), np.ones(3))
    np.testing.assert_allclose(ipw_alr_covariance(z, zp), z.T @ z / 9, atol=1e-14)


def test_ipw_hand_example():
    # (1/2) * (1^2 / 0.5) = 1; a single observed entry needs min_observed=1.
    delta = np.array([[1.0], [0.0]])
    with pytest.raises(InsufficientSamples):
        ZeroPattern(delta, np.array([0.5]))
    zp = ZeroPattern(delta, np.array([0.5]), min_observed=1)
    assert ipw_alr_covariance(np.array([[1.0], [3.0]]), zp)[0, 0] == pytest.approx(1.0)


def test_ipw_weighting_off_diagonal():
    z = np.array([[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]])
    delta = np.array([[1, 1], [1, 0], [0, 1]], dtype=float)
    pi = np.array([0.5, 0.8])
    s = ipw_alr_covariance(z, ZeroPattern(delta, pi))
    assert s[0, 1] == pytest.approx((1 * 2) / 3 / (0.5 * 0.8))
    assert s[0, 0] == pytest.approx((1 + 9) / 3 / 0.5)
    assert s[1, 1] == pytest.approx((4 + 0.25) / 3 / 0.8)


def test_zero_pattern_validation():
    with pytest.raises(InvalidParameter):
        ZeroPattern(np.ones((3, 1)), np.array([0.0]))
    with pytest.raises(InvalidInput):
        ZeroPattern(np.full((3, 1), 0.5), np.array([1.0]))
    with pytest.raises(InvalidDimension):
        ZeroPattern(np.ones((3, 2)), np.array([1.0]))


def test_alr_to_clr_two_parts():
    s = 2.7
    np.testing.assert_allclose(alr_to_clr_covariance([[s]]), s / 4 * np.array([[1, -1], [-1, 1]]), atol=1e-15)


def test_alr_to_clr_zero():
    np.testing.assert_array_equal(alr_to_clr_covariance(np.zeros((3, 3))), np.zeros((4, 4)))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 6))
def test_alr_to_clr_exact_logistic_normal(seed, p):
    rng = np.random.default_rng(seed)
    sigma0 = random_spd(rng, p)
    F = np.hstack([np.eye(p - 1), -np.ones((p - 1, 1))])
    sigma_alr = F @ sigma0 @ F.T
    out = alr_to_clr_covariance(sigma_alr)
    np.testing.assert_allclose(out, basis_to_clr_covariance(sigma0), atol=1e-8)
    assert np.max(np.abs(out @ np.ones(p))) <= 1e-12 * max(1, np.abs(out).max())
