import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_lab.errors import ConvergenceError
from extremal_lab.polynomial import MonicPolynomial, deflate, horner_with_derivative, poly_roots

complexes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_monomial_evaluates_to_power():
    p = MonicPolynomial.monomial(4)
    z = np.array([0.5, 2j, -1.5 + 0.5j])
    assert np.allclose(p(z), z**4)


def test_from_full_normalizes_leading_coefficient():
    p = MonicPolynomial.from_full([2.0, 0.0, 4.0])
    assert np.allclose(p.full, [0.5, 0.0, 1.0])
    with pytest.raises(ValueError):
        MonicPolynomial.from_full([1.0, 0.0])


@pytest.mark.parametrize(
    "coeffs, expected",
    [([-1.0, 0.0], {1.0, -1.0}), ([-1.0], {1.0})],
)
def test_roots_examples(coeffs, expected):
    roots = poly_roots(MonicPolynomial(coeffs))
    assert len(roots) == len(expected)
    for e in expected:
        assert np.min(np.abs(roots - e)) < 1e-12


def test_cube_roots_of_unity():
    roots = poly_roots(MonicPolynomial([-1.0, 0.0, 0.0]))
    omega = np.exp(2j * np.pi * np.arange(3) / 3)
    for w in omega:
        assert np.min(np.abs(roots - w)) < 1e-12


def test_degree_zero_has_no_roots():
    with pytest.raises(ValueError):
        poly_roots(MonicPolynomial([]))


def test_nonconvergence_is_reported():
    with pytest.raises(ConvergenceError) as info:
        poly_roots(MonicPolynomial(np.random.default_rng(0).standard_normal(30)), max_iter=1)
    assert info.value.last is not None


@given(st.lists(complexes, min_size=1, max_size=8))
def test_roots_reproduce_polynomial(roots):
    full = np.poly(roots)[::-1]
    p = MonicPolynomial.from_full(full)
    found = poly_roots(p)
    # residual criterion from the root finder contract
    scale = np.sum(np.abs(p.full)[None, :] * np.maximum(1.0, np.abs(found))[:, None] ** np.arange(p.degree + 1), axis=1)
    assert np.all(np.abs(p(found)) <= 1e-9 * scale)


@given(st.lists(complexes, min_size=1, max_size=6), complexes)
def test_derivative_matches_finite_difference(coeffs, z):
    p = MonicPolynomial(coeffs)
    _, dp = horner_with_derivative(p.full, z)
    h = 1e-6
    fd = (p(z + h) - p(z - h)) / (2 * h)
    assert abs(dp - fd) <= 1e-5 * (1 + abs(dp))


@pytest.mark.parametrize("root", [0.3, -0.5j, 2.0, -3.0 + 1j])
def test_deflate_removes_factor(root):
    rest = [0.5, -0.25j, 0.1]
    full = np.convolve([-root, 1.0], np.append(rest, 1.0))
    q = deflate(MonicPolynomial(full[:-1]), root)
    assert np.allclose(q.full, np.append(rest, 1.0), atol=1e-12)
