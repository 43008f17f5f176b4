import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from extremal_lab.conformal import ExteriorMap, phi_eval, psi_eval
from extremal_lab.errors import DomainError
from extremal_lab.measure import AngularMeasure, RadialMeasure, RegionMeasure, Weight
from extremal_lab.szego import (
    NonSzegoError,
    SzegoFunction,
    geometric_mean,
    predicted_limit,
    psiint_check,
    szego_eval,
)

DISK = ExteriorMap.disk()
MAPS = {
    "disk": DISK,
    "ellipse": ExteriorMap.laurent([0, 0.2]),
    "power": ExteriorMap.power_family(3, 0.5),
}


def bernstein(a):
    return lambda t: np.abs(1 - a * np.exp(1j * np.asarray(t))) ** 2


def test_geometric_mean_examples():
    assert geometric_mean(lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-14)
    assert geometric_mean(bernstein(0.5)) == pytest.approx(1.0, abs=1e-12)
    two = AngularMeasure.two_level()
    assert geometric_mean(two.density, breakpoints=two.breakpoints) == pytest.approx(np.sqrt(2), rel=1e-13)


def test_geometric_mean_matches_adaptive_quadrature():
    f = lambda t: 1 + 0.7 * np.cos(t) + 0.2 * np.sin(3 * t)  # noqa: E731
    ref = integrate.quad(lambda t: np.log(f(t)), 0, 2 * np.pi, epsrel=1e-13)[0] / (2 * np.pi)
    assert geometric_mean(f) == pytest.approx(np.exp(ref), rel=1e-12)


def test_non_szego_density_raises():
    with pytest.raises(NonSzegoError):
        geometric_mean(lambda t: np.zeros_like(t))


@pytest.mark.parametrize("q", [1.0, 2.0, 3.5])
@pytest.mark.parametrize("a", [0.25, 0.5, 0.9])
def test_bernstein_closed_form(q, a):
    # the outer function with |S|^q = |1 - a e^{it}|^2 is (1 - a/z)^{2/q}
    S = SzegoFunction.from_density(bernstein(a), q)
    for z in (2.0, -1.5 + 0.5j, 3j, 1.1):
        assert szego_eval(S, z) == pytest.approx((1 - a / z) ** (2 / q), rel=1e-8)


def test_szego_examples():
    one = SzegoFunction.from_density(lambda t: np.ones_like(t), 2.0)
    assert szego_eval(one, 1.7 - 3j) == pytest.approx(1.0)
    S = SzegoFunction.from_density(bernstein(0.5), 2.0)
    assert szego_eval(S, 2.0) == pytest.approx(0.75, abs=1e-12)
    assert szego_eval(S, 1e8) == pytest.approx(S.at_infinity(), rel=1e-7)


def test_szego_rejects_points_near_circle():
    S = SzegoFunction.from_density(bernstein(0.5), 2.0)
    with pytest.raises(DomainError):
        szego_eval(S, 1.0 + 1e-9)


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
def test_value_at_infinity(q):
    f = lambda t: 1 + 0.5 * np.cos(t)  # noqa: E731
    S = SzegoFunction.from_density(f, q)
    assert S.at_infinity() ** q == pytest.approx(geometric_mean(f), rel=1e-8)


def test_boundary_modulus():
    f = lambda t: 1 + 0.5 * np.cos(t) + 0.3 * np.sin(2 * t)  # noqa: E731
    q = 2.0
    S = SzegoFunction.from_density(f, q, n_quad=8192)
    theta = np.linspace(0.1, 6.1, 13)
    vals = np.abs(szego_eval(S, (1 + 1e-4) * np.exp(1j * theta))) ** q
    assert np.allclose(vals, f(theta), rtol=2e-3)


DENSITIES = [
    lambda t: np.ones_like(t),
    bernstein(0.5),
    lambda t: 1 + np.cos(t),
    lambda t: 2 + np.sign(np.sin(t)),
]


@pytest.mark.parametrize("density", DENSITIES, ids=["one", "bernstein", "cos_zero", "steps"])
def test_szego_non_vanishing(density, rng):
    S = SzegoFunction.from_density(density, 2.0)
    z = (1.01 + 5 * rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
    assert np.all(np.abs(szego_eval(S, z)) > 0)


@given(st.floats(0.1, 10.0), st.floats(0.5, 4.0))
def test_scaling_covariance(c, q):
    f = lambda t: 1 + 0.5 * np.cos(t)  # noqa: E731
    S = SzegoFunction.from_density(f, q)
    Sc = SzegoFunction.from_density(lambda t: c * f(t), q)
    z = 1.5 + 0.7j
    assert szego_eval(Sc, z) == pytest.approx(c ** (1 / q) * szego_eval(S, z), rel=1e-10)
    mu = RegionMeasure(DISK, RadialMeasure.area(), AngularMeasure.cosine(0.5))
    muc = RegionMeasure(DISK, RadialMeasure.area(), AngularMeasure.cosine(0.5), Weight(constant=c))
    assert predicted_limit(muc, q).value == pytest.approx(c * predicted_limit(mu, q).value, rel=1e-10)


def test_predicted_limit_examples():
    mu = RegionMeasure(DISK, RadialMeasure.area(), exterior_atoms=((2.0, 1.0),))
    assert predicted_limit(mu, 2.0).value == pytest.approx(4.0, rel=1e-13)
    assert predicted_limit(RegionMeasure(DISK, RadialMeasure.area()), 2.0).value == pytest.approx(1.0)
    half = RegionMeasure(DISK, RadialMeasure.delta1(), h=Weight.halfplane())
    assert predicted_limit(half, 2.0).value == pytest.approx(np.sqrt(2), rel=1e-12)


def test_predicted_limit_on_ellipse_atom():
    mp = MAPS["ellipse"]
    mu = RegionMeasure(mp, RadialMeasure.delta1(), exterior_atoms=((2.5, 1.0),))
    assert predicted_limit(mu, 3.0).value == pytest.approx(abs(phi_eval(mp, 2.5)) ** 3, rel=1e-12)


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_prediction_ignores_boundary_and_sigma_mass(m1, m2, m3):
    base = RegionMeasure(DISK, RadialMeasure.area(), AngularMeasure.cosine(0.5), exterior_atoms=((2.0, 1.0),))
    extra = RegionMeasure(
        DISK, RadialMeasure.area(), AngularMeasure.cosine(0.5), exterior_atoms=((2.0, 1.0),),
        boundary_atoms=((1j, m1 + 0.1),), sigma1=((0.2, m2 + 0.1),), sigma2=((0.5j, m3 + 0.1),),
    )
    assert predicted_limit(extra, 2.0).value == predicted_limit(base, 2.0).value


def test_non_szego_prediction_flags():
    nu = AngularMeasure(density=lambda t: np.zeros_like(t), name="zero", atoms=((0.0, 1.0),))
    mu = RegionMeasure(DISK, RadialMeasure.delta1(), nu)
    pred = predicted_limit(mu, 2.0)
    assert pred.value == 0.0 and not pred.szego


def test_psiint_examples():
    lhs, rhs = psiint_check(DISK, 2.0, 0.7, 2.0)
    assert lhs == pytest.approx(2 * np.log(2), abs=1e-12) and rhs == pytest.approx(2 * np.log(2))
    lhs, rhs = psiint_check(DISK, np.exp(0.3j), 0.9, 1.0)
    assert abs(lhs) < 1e-12 and abs(rhs) < 1e-12
    lhs, rhs = psiint_check(MAPS["ellipse"], 3.0, 0.95, 2.0)
    assert abs(lhs - rhs) <= 1e-8


def test_psiint_rejects_interior_points():
    with pytest.raises(DomainError):
        psiint_check(DISK, 0.5, 0.9, 2.0)
    with pytest.raises(DomainError):
        psiint_check(MAPS["ellipse"], 3.0, 0.1, 2.0)


@pytest.mark.parametrize("name", list(MAPS))
@pytest.mark.parametrize("x", [2.0, 3j, -2.5, 1.5 + 1.5j])
@pytest.mark.parametrize("frac", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("q", [1.0, 2.0])
def test_psiint_grid(name, x, frac, q):
    mp = MAPS[name]
    rho = mp.rho if mp.kind != "disk" else 0.0
    r = max(rho + frac * (1 - rho), 1e-3)
    lhs, rhs = psiint_check(mp, x, r, q)
    assert abs(lhs - rhs) <= 1e-8


def test_psiint_boundary_point_at_unit_radius():
    # x on the curve and r = 1: the integrand has a log singularity, integrable
    mp = MAPS["ellipse"]
    x = psi_eval(mp, np.exp(0.4j))
    lhs, rhs = psiint_check(mp, x, 1.0, 2.0, n_quad=1 << 14)
    assert abs(rhs) < 1e-10
    assert abs(lhs) < 1e-3
