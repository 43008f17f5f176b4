import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_lab.christoffel import (
    boundary_mass,
    christoffel_report,
    christoffel_trace,
    lambda_kernel,
    lambda_opt,
    mobius_invariance_check,
)
from extremal_lab.conformal import ExteriorMap
from extremal_lab.errors import DomainError
from extremal_lab.measure import (
    AngularMeasure,
    RadialMeasure,
    RegionMeasure,
    discretize,
    mobius_pushforward,
    point_measure,
)
from extremal_lab.oracles import brute_force_christoffel

DISK = ExteriorMap.disk()
N40 = np.arange(1, 41)


@pytest.fixture(scope="module")
def boundary_atom():
    mu = RegionMeasure(DISK, RadialMeasure.delta1(), boundary_atoms=((1.0, 1.0),))
    return mu, discretize(mu, 512, 16)


def test_kernel_examples(circle_disc, area_disc):
    assert np.allclose(lambda_kernel(circle_disc, 0.0, 20).values, 1.0)
    res = lambda_kernel(circle_disc, 1.0, 20)
    assert np.allclose(res.values, 1.0 / np.arange(1, 22), rtol=1e-12)
    assert np.allclose(res.partial_sums, np.arange(1, 22), rtol=1e-12)
    assert np.allclose(lambda_kernel(area_disc, 0.0, 20).values, 1.0)


def test_constrained_examples(circle_disc):
    assert lambda_opt(circle_disc, 0.0, 3, 4.0)[0] == pytest.approx(1.0, abs=1e-10)
    assert lambda_opt(circle_disc, 1.0, 3, 2.0)[0] == pytest.approx(0.25, rel=1e-10)
    with pytest.raises(ValueError):
        lambda_opt(circle_disc, 0.0, 0, 2.0)


@pytest.mark.parametrize("z", [0.3 + 0.2j, 0.95, -0.5j, np.exp(2.0j), 1.4])
def test_constrained_matches_kernel(z):
    mu = RegionMeasure(ExteriorMap.disk(), RadialMeasure.area(), AngularMeasure.cosine(0.5))
    disc = discretize(mu, 128, 16)
    kern = lambda_kernel(disc, z, 8).values
    for n in (1, 4, 8):
        assert lambda_opt(disc, z, n, 2.0)[0] == pytest.approx(kern[n], rel=1e-8)


def test_boundary_atom_plateau(boundary_atom):
    mu, disc = boundary_atom
    assert boundary_mass(mu, 1.0) == 1.0
    res = christoffel_trace(disc, 1.0, N40, 2.0)
    assert abs(res.limit - 1.0) <= 0.05
    assert np.all(res.values >= 1.0 - 1e-12)


def test_boundary_atom_plateau_general_q(boundary_atom):
    _, disc = boundary_atom
    res = christoffel_trace(disc, 1.0, [5, 10, 20], 3.0)
    assert np.all(res.values >= 1.0 - 1e-9)
    assert res.values[-1] <= 1.1


def test_boundary_decay_without_atoms():
    mu = RegionMeasure(DISK, RadialMeasure.delta1(), AngularMeasure.cosine(0.5))
    res = christoffel_trace(discretize(mu, 512, 16), 1.0, N40, 2.0)
    assert res.values[-1] < 0.05


@pytest.mark.parametrize("z", [0.0, 0.5, 0.9j])
def test_interior_positivity_and_summability(z):
    mu = RegionMeasure(DISK, RadialMeasure.area(), AngularMeasure.cosine(0.5))
    res = lambda_kernel(discretize(mu, 512, 32), z, 60)
    assert res.values[-1] > 0.01
    # partial sums of |p_j(z)|^2 level off
    assert res.partial_sums[60] - res.partial_sums[40] < 0.01 * res.partial_sums[60]


def test_mobius_identity_at_origin(circle_disc):
    chk = mobius_invariance_check(circle_disc, 0.0, 2.0, [1, 5, 10])
    assert np.allclose(chk.lhs.values, chk.rhs.values)
    assert chk.relative_gap == 0.0


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_mobius_against_brute_force(q):
    disc = discretize(RegionMeasure(DISK, RadialMeasure.delta1()), 64, 16)
    pushed = mobius_pushforward(disc, 0.5)
    for n in (1, 2):
        ours = lambda_opt(pushed, 0.0, n, q)[0]
        _, ref = brute_force_christoffel(pushed.nodes, pushed.weights, 0.0, n, q, points=9)
        assert ours <= ref * (1 + 1e-6)
        assert ours == pytest.approx(ref, rel=1e-4)


def test_mobius_plateaus_agree(circle_disc):
    chk = mobius_invariance_check(circle_disc, 0.5, 2.0, N40)
    assert chk.relative_gap <= 0.05


def test_mobius_rejects_outside_points(circle_disc):
    with pytest.raises(DomainError):
        mobius_invariance_check(circle_disc, 1.0, 2.0, [1])


def test_product_measure_beats_its_angular_part():
    nu = AngularMeasure.cosine(0.8)
    prod = discretize(RegionMeasure(DISK, RadialMeasure.area(), nu), 256, 32)
    circ = discretize(RegionMeasure(DISK, RadialMeasure.delta1(), nu), 256, 16)
    a = lambda_kernel(prod, 0.0, 30)
    b = lambda_kernel(circ, 0.0, 30)
    assert np.all(a.values >= b.values - 1e-12)
    assert a.limit > b.limit * (1 + 1e-3)


@settings(max_examples=15)
@given(st.lists(st.tuples(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.05, 2.0)), min_size=6, max_size=10),
       st.integers(0, 5), st.sampled_from([1.5, 2.0, 3.0]))
def test_monotone_and_bounded_below(points, j, q):
    nodes = np.array([complex(a, b) for a, b, _ in points])
    if np.unique(np.round(nodes, 6)).size < nodes.size:
        return
    weights = np.array([m for _, _, m in points])
    disc = point_measure(nodes, weights)
    z = nodes[j]
    vals = christoffel_trace(disc, z, [1, 2, 3, 4], q).values
    assert np.all(np.diff(vals) <= 1e-9 * vals[0])
    assert np.all(vals >= weights[j] * (1 - 1e-9))


def test_report_verdicts(boundary_atom, circle_disc):
    circle = RegionMeasure(DISK, RadialMeasure.delta1())
    rep = christoffel_report(circle, circle_disc, 2.0, list(range(1, 21)),
                             exact=[(0.0, "one"), (1.0, "inverse_n_plus_1")], mobius=[0.5])
    assert all(rep.verdicts.values()) and len(rep.verdicts) == 3
    mu, disc = boundary_atom
    rep = christoffel_report(mu, disc, 2.0, list(N40), plateau=[(1.0, None)])
    assert rep.verdicts["plateau/z=(1,0)"]
    assert rep.summary["plateau/z=(1,0)"]["target"] == 1.0
    with pytest.raises(ValueError):
        christoffel_report(circle, circle_disc, 2.0, [1], exact=[(0.0, "two")])
