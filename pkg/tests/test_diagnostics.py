import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_lab.conformal import ExteriorMap, psi_eval
from extremal_lab.diagnostics import (
    SPARSE_LOG_CONSTANT,
    DiagnosticsReport,
    attraction_radii,
    closed_form_moment,
    exact_symmetric_check,
    faber_weak_limit,
    genlow_bound,
    last_quarter_mean,
    lemniscate_prediction,
    lemniscate_ratio_sequence,
    moment_ratio_trace,
    norm_ratio_sequence,
    strong_ratio_field,
    weak_moment_table,
    zero_attraction_trace,
)
from extremal_lab.errors import DomainError
from extremal_lab.measure import AngularMeasure, RadialMeasure, RegionMeasure, Weight, radial_moment

DISK = ExteriorMap.disk()
ELLIPSE = ExteriorMap.laurent([0, 0.2])


def circle_atom(*atoms):
    return RegionMeasure(DISK, RadialMeasure.delta1(), exterior_atoms=tuple((a, 1.0) for a in atoms))


def test_report_plumbing():
    rep = DiagnosticsReport("demo")
    rep.add("x", 1, 2.0, 3.0, 4.0)
    rep.add("x", 2, 2.0, 3.5)
    assert rep.records[0].deviation == 1.0 and rep.records[1].deviation is None
    ns, vals = rep.series("x")
    assert list(ns) == [1, 2] and list(vals) == [3.0, 3.5]
    rep.verdicts["x"] = True
    assert rep.passed
    rep.errors.append("boom")
    assert not rep.passed


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40))
def test_last_quarter_mean_bounds(values):
    m = last_quarter_mean(values)
    tail = values[-max(1, int(np.ceil(len(values) / 4))):]
    assert min(tail) - 1e-6 <= m <= max(tail) + 1e-6


def test_area_ratio_is_identically_one():
    mu = RegionMeasure(DISK, RadialMeasure.area())
    rep = norm_ratio_sequence(mu, 2.0, list(range(1, 9)), n_theta=128, n_r=16)
    _, ratios = rep.series("ratio")
    assert np.allclose(ratios, 1.0, atol=1e-12)
    assert rep.verdicts == {"ratio": True, "sandwich": True}
    assert all(r.prediction == 1.0 for r in rep.records if r.experiment == "norm_ratio/ratio")


def test_circle_atom_ratio_climbs_to_four():
    rep = norm_ratio_sequence(circle_atom(2.0), 2.0, list(range(1, 51)), n_theta=512, n_r=16)
    ns, ratios = rep.series("ratio")
    assert ratios[0] == pytest.approx(3.0, rel=1e-12)
    assert np.all(np.diff(ratios) >= -1e-12) and ratios[-1] <= 4.0 + 1e-9
    assert abs(ratios[-1] - 4.0) < 0.05 * 4
    _, roots = rep.series("nth_root")
    assert abs(roots[-1] - 1.0) <= 0.05
    assert rep.verdicts["sandwich"]


@pytest.mark.parametrize("q", [1.5, 3.0])
def test_sandwich_for_general_q(q):
    mu = RegionMeasure(ELLIPSE, RadialMeasure.uniform(0.75), AngularMeasure.cosine(0.5),
                       exterior_atoms=((2.0, 1.0),), boundary_atoms=((psi_eval(ELLIPSE, 1j), 0.5),))
    rep = norm_ratio_sequence(mu, q, [4, 8, 12], n_theta=128, n_r=16)
    assert rep.verdicts["sandwich"]
    _, low = rep.series("genlow")
    _, ratio = rep.series("ratio")
    _, up = rep.series("upper")
    assert np.all(low <= ratio * (1 + 1e-9)) and np.all(ratio <= up * (1 + 1e-9))


def test_norm_ratio_argument_checks():
    mu = RegionMeasure(DISK, RadialMeasure.area())
    with pytest.raises(ValueError, match="8 \\* max degree"):
        norm_ratio_sequence(mu, 2.0, [20], n_theta=64)
    with pytest.raises(ValueError, match="judge"):
        norm_ratio_sequence(mu, 2.0, [2], n_theta=64, judge="median")


def test_genlow_on_rotation_invariant_measure():
    mu = RegionMeasure(DISK, RadialMeasure.area())
    for n in (1, 5):
        assert genlow_bound(mu, 2.0, n) == pytest.approx(1 / (n + 1), rel=1e-12)


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
def test_exact_symmetric_check(q):
    mu = RegionMeasure(DISK, RadialMeasure.area())
    rep = exact_symmetric_check(mu, q, [1, 4, 8], n_theta=128, n_r=32)
    assert all(rep.verdicts.values())
    with pytest.raises(ValueError):
        exact_symmetric_check(circle_atom(2.0), q, [1], n_theta=128)


@given(st.floats(0.0, 300.0))
def test_closed_form_moments_match(t):
    for tau in (RadialMeasure.area(), RadialMeasure.power(2.5), RadialMeasure.dirac(0.7), RadialMeasure.delta1()):
        assert closed_form_moment(tau, t) == pytest.approx(radial_moment(tau, t), rel=1e-12, abs=1e-300)
    assert closed_form_moment(RadialMeasure.uniform(0.5), t) is None


def test_faber_weak_limit_examples():
    mu = RegionMeasure(DISK, RadialMeasure.area())
    rep = faber_weak_limit(mu, 2.0, [1], [4, 8], n_theta=128, n_r=16)
    _, vals = rep.series("k=1")
    assert np.allclose(vals, 0.0, atol=1e-13)
    circle = RegionMeasure(DISK, RadialMeasure.delta1(), AngularMeasure.cosine(1.0))
    rep = faber_weak_limit(circle, 2.0, [1, 2], [4, 8], n_theta=128, n_r=16)
    assert rep.summary["limits"]["1"][0] == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(rep.series("k=1")[1], 0.5, atol=1e-12)
    assert np.allclose(rep.series("k=2")[1], 0.0, atol=1e-12)
    # on the area measure the extra radius costs (2m+2)/(2m+3), with m = n - shift
    area = RegionMeasure(DISK, RadialMeasure.area(), AngularMeasure.cosine(1.0))
    for shift in (0, 1):
        rep = faber_weak_limit(area, 2.0, [1], [4, 8, 12, 16], n_theta=256, n_r=16, shift=shift)
        ns, vals = rep.series("k=1")
        m = ns - shift
        assert np.allclose(vals, 0.5 * (2 * m + 2) / (2 * m + 3), rtol=1e-12)
        assert all(rep.verdicts.values())


def test_faber_weak_limit_on_ellipse():
    mu = RegionMeasure(ELLIPSE, RadialMeasure.uniform(0.75), AngularMeasure.cosine(0.6))
    rep = faber_weak_limit(mu, 2.0, [1, 2], [20, 30, 40], n_theta=512, n_r=16)
    assert all(rep.verdicts.values())


def test_weak_moments_examples(circle_disc, atom_disc):
    mu = RegionMeasure(DISK, RadialMeasure.delta1())
    rep = weak_moment_table(mu, 2.0, [1, 2], [5, 10], n_theta=128, n_r=16)
    _, vals = rep.series("k=1")
    assert np.allclose(vals, 0.0, atol=1e-14)
    rep = weak_moment_table(circle_atom(2.0), 2.0, [1], [10, 20, 40], n_theta=512, n_r=16)
    assert rep.verdicts["k=1"] and rep.verdicts["atom_mass"]
    _, mass = rep.series("atom_mass")
    assert mass[-1] <= 0.05


def test_zero_attraction_examples():
    rep = zero_attraction_trace(circle_atom(2.0), 2.0, list(range(1, 41)), n_theta=512, n_r=16)
    _, dist = rep.series("atom0/distance")
    assert dist[0] == pytest.approx(1.0, abs=1e-12)
    assert rep.summary["fits"]["atom0"]["exponent"] > 0
    assert all(rep.verdicts.values())


def test_two_atoms_attract_one_zero_each():
    mu = circle_atom(2.0, -2j)
    assert attraction_radii(mu) == pytest.approx([0.5, 0.5], abs=1e-6)
    rep = zero_attraction_trace(mu, 2.0, list(range(2, 31)), n_theta=256, n_r=16)
    for i in (0, 1):
        _, counts = rep.series(f"atom{i}/count")
        assert np.all(counts[-10:] == 1)
    assert all(rep.verdicts.values())


def test_zero_attraction_needs_atoms():
    with pytest.raises(ValueError):
        zero_attraction_trace(RegionMeasure(DISK, RadialMeasure.delta1()), 2.0, [1, 2], n_theta=64)


def test_strong_ratio_on_uniform_circle():
    mu = RegionMeasure(DISK, RadialMeasure.delta1())
    rep = strong_ratio_field(mu, 2.0, [3, 9], n_theta=128, n_r=16)
    assert max(r.value for r in rep.records) < 1e-12


def test_strong_ratio_with_atom():
    rep = strong_ratio_field(circle_atom(2.0), 2.0, [10, 20, 40], sample_w=[3.0, 2.0, -2j], n_theta=512, n_r=16)
    assert rep.verdicts["|w|=2"]
    _, dev3 = rep.series("|w|=3")
    assert dev3[-1] <= 0.02


def test_strong_ratio_bernstein():
    mu = RegionMeasure(DISK, RadialMeasure.delta1(), AngularMeasure.bernstein(0.5))
    rep = strong_ratio_field(mu, 2.0, [10, 20, 40], sample_w=[2.0, 2j, -2.0], n_theta=512, n_r=16)
    _, dev = rep.series("|w|=2")
    assert dev[-1] <= 0.02 and dev[-1] <= dev[0]


def test_strong_ratio_rejects_close_points():
    with pytest.raises(DomainError):
        strong_ratio_field(circle_atom(2.0), 2.0, [4], sample_w=[1.01], n_theta=128)


def test_moment_ratio_examples():
    rep = moment_ratio_trace(RadialMeasure.area(), 2.0, [1, 10, 100])
    ns, ratio = rep.series("ratio")
    assert np.allclose(ratio, (ns + 1) / (ns + 2), rtol=1e-12)
    rep = moment_ratio_trace(RadialMeasure.dirac(0.5), 3.0, [1, 5, 50])
    _, ratio = rep.series("ratio")
    _, root = rep.series("root")
    assert np.allclose(ratio, 0.5**3) and root[-1] == pytest.approx(0.5)
    assert not rep.summary["contains_one"]


def test_sparse_moments_decay_slowly():
    n_list = [2**k for k in range(0, 15)]
    rep = moment_ratio_trace(RadialMeasure.sparse_atoms(), 2.0, n_list, log_floor=SPARSE_LOG_CONSTANT)
    assert rep.summary["contains_one"] and rep.verdicts["log_floor"]
    ns, scaled = rep.series("log_scaled")
    # n c_{2n} does not go to zero along powers of two: it grows
    n_c = ns * scaled / np.log2(2 * ns) ** 2
    assert n_c[-1] > n_c[5]


def test_lemniscate_small_degrees():
    assert lemniscate_prediction() == pytest.approx(2 * np.pi)
    rep = lemniscate_ratio_sequence(RadialMeasure.area(), 2.0, [1, 2, 3], n_theta=256)
    assert rep.verdicts["upper_bound"]
    assert rep.summary["worst_relative"] <= 1.05


def test_lemniscate_prediction_scales_with_h():
    h = Weight(constant=3.0)
    assert lemniscate_prediction(h) == pytest.approx(6 * np.pi)
