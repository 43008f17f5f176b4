"""Convergence experiments over the degree ``n``.

Each function returns a :class:`DiagnosticsReport` whose records carry the
computed value next to the predicted limit.  Verdicts compare the mean over
the last quarter of the degree grid with the prediction.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .conformal import faber, phi_eval, psi_eval
from .errors import ConvergenceError, DomainError, ExtremalLabError
from .extremal import OrthoBasis, eval_norm, solve_monic
from .measure import discretize, lemniscate_measure, log_radial_moment, radial_moment
from .polynomial import MonicPolynomial, deflate, poly_roots
from .quadrature import angular_rule
from .szego import SzegoFunction, boundary_weight, predicted_limit, _clamped_log

DEFAULT_TOL = 0.05


@dataclass
class Record:
    experiment: str
    n: int
    q: float
    value: float
    prediction: float | None = None
    deviation: float | None = None
    verdict: str = ""

    def row(self):
        return [self.experiment, self.n, self.q, self.value, self.prediction, self.deviation, self.verdict]


@dataclass
class DiagnosticsReport:
    experiment: str
    degrees: list = field(default_factory=list)
    records: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    def add(self, quantity, n, q, value, prediction=None, deviation=None, verdict=""):
        name = f"{self.experiment}/{quantity}" if quantity else self.experiment
        if deviation is None and prediction is not None:
            deviation = abs(value - prediction)
        self.records.append(Record(name, int(n), float(q), float(value),
                                   None if prediction is None else float(prediction),
                                   None if deviation is None else float(deviation), verdict))

    def series(self, quantity):
        name = f"{self.experiment}/{quantity}"
        recs = [r for r in self.records if r.experiment == name]
        return np.array([r.n for r in recs]), np.array([r.value for r in recs])

    @property
    def passed(self):
        return all(self.verdicts.values()) and not self.errors


def last_quarter_mean(values):
    values = np.asarray(values, dtype=float)
    k = max(1, int(np.ceil(values.size / 4)))
    return float(values[-k:].mean())


def _mark(report, quantity, ok):
    for r in report.records:
        if r.experiment == f"{report.experiment}/{quantity}":
            r.verdict = "pass" if ok else "fail"


def _check_resolution(n_theta, n_list):
    if n_theta < 8 * max(n_list):
        raise ValueError(f"n_theta={n_theta} is below 8 * max degree = {8 * max(n_list)}")


def _tau_moment(mu, t):
    return radial_moment(mu.radial, t)


def _phi_at_nodes(mu, disc):
    """``phi`` at every node; 0 on sigma1 nodes where it is undefined."""
    return np.where(np.isnan(disc.preimage), 0.0, disc.preimage)


def genlow_bound(mu, q, n, n_theta=512, n_r=64):
    """``int r**(nq) exp(int log(h nu')(r e^{i theta}) d theta/2pi) d tau(r)``."""
    theta, wt = angular_rule(n_theta, mu.angular.breakpoints + mu.h.breakpoints)
    logs_nu = _clamped_log(mu.angular.density(theta))
    tau = mu.radial
    r, wr = tau.nodes(n_r)
    if tau.atoms:
        r = np.concatenate([r, [a for a, _ in tau.atoms]])
        wr = np.concatenate([wr, [m for _, m in tau.atoms]])
    total = 0.0
    for rk, wk in zip(r, wr):
        g = np.exp(np.sum(wt * (logs_nu + _clamped_log(mu.h(rk * np.exp(1j * theta))))))
        total += wk * rk ** (n * q) * g
    return float(total)


def y_infinity(mu):
    """``prod_j (z - z_j)`` over the exterior atoms."""
    return MonicPolynomial.from_full(np.poly([z for z, _ in mu.exterior_atoms])[::-1]) if mu.m else MonicPolynomial(np.zeros(0))


def upsilon_infinity(mu):
    """``prod_j (z - zeta_j)`` over the boundary atoms (one factor per boundary atom)."""
    return MonicPolynomial.from_full(np.poly([z for z, _ in mu.boundary_atoms])[::-1]) if mu.ell else MonicPolynomial(np.zeros(0))


def _product(*polys):
    full = np.array([1.0 + 0j])
    for p in polys:
        full = np.convolve(full, p.full)
    return MonicPolynomial(full[:-1])


def norm_ratio_sequence(mu, q, n_list, n_theta=512, n_r=64, tol=DEFAULT_TOL, disc=None, sandwich=True,
                        judge="last_quarter"):
    """Ratios ``||P_n||_q**q / c_{qn}(tau)`` against the predicted limit.

    The verdict compares the prediction with the last-quarter mean of the
    ratios (``judge="last_quarter"``) or with the ratio at the largest degree
    (``judge="last"``).

    Also records ``||P_n||**(1/n)`` (regularity), the general lower bound
    divided by ``c_{qn}(tau)``, and the smallest upper bound
    ``||y_inf Upsilon_inf F_{n-m-l-k} P_k(boundary)||**q / c_{qn}`` for
    ``k = 0, 1, 2``, where ``P_k(boundary)`` is extremal for ``psi_*(h nu)``.
    """
    _check_resolution(n_theta, n_list)
    disc = disc or discretize(mu, n_theta, n_r)
    pred = predicted_limit(mu, q)
    rep = DiagnosticsReport("norm_ratio", list(n_list))
    basis = OrthoBasis.build(disc, max(n_list))
    bdisc = mu.boundary_measure().discretize(n_theta) if sandwich else None
    y_inf, ups_inf = y_infinity(mu), upsilon_infinity(mu)
    sandwich_ok = True
    for n in n_list:
        try:
            sol = solve_monic(disc, n, q, basis=basis)
        except ExtremalLabError as exc:
            rep.errors.append(f"n={n}: {exc}")
            continue
        Fq = sol.norm_q**q
        c = _tau_moment(mu, q * n)
        rep.add("ratio", n, q, Fq / c, pred.value)
        rep.add("nth_root", n, q, sol.norm_q ** (1.0 / n), 1.0)
        low = genlow_bound(mu, q, n, n_theta, n_r)
        rep.add("genlow", n, q, low / c)
        if sandwich:
            ups = []
            for k in (0, 1, 2):
                rest = n - mu.m - mu.ell - k
                if rest < 0:
                    continue
                Pk = solve_monic(bdisc, k, q).poly.monomial_form() if k else MonicPolynomial(np.zeros(0))
                cand = _product(y_inf, ups_inf, faber(mu.map, rest), Pk)
                ups.append(eval_norm(disc, cand, q) ** q)
            up = min(ups) if ups else np.inf
            rep.add("upper", n, q, up / c)
            ok = low <= Fq * (1 + 1e-9) and Fq <= up * (1 + 1e-9)
            sandwich_ok &= ok
    ns, ratios = rep.series("ratio")
    if ratios.size:
        if judge not in ("last_quarter", "last"):
            raise ValueError(f"unknown judge {judge!r}")
        est = last_quarter_mean(ratios) if judge == "last_quarter" else float(ratios[-1])
        rep.summary.update(ratio_estimate=est, judge=judge, prediction=pred.value, szego=pred.szego)
        ok = pred.szego and abs(est - pred.value) <= tol * pred.value
        rep.verdicts["ratio"] = bool(ok)
        _mark(rep, "ratio", ok)
    if sandwich:
        rep.verdicts["sandwich"] = bool(sandwich_ok)
    return rep


def closed_form_moment(tau, t):
    """``c_t(tau)`` in closed form for the atom and power families, else None."""
    if tau.name in ("delta1", "dirac", "atoms", "sparse_atoms"):
        return float(sum(m * r**t for r, m in tau.atoms))
    if tau.name in ("area", "power"):
        a = tau.params.get("a", 1.0)
        return (a + 1.0) / (t + a + 1.0)
    return None


def exact_symmetric_check(mu, q, n_list, n_theta=512, n_r=64, tol=1e-10, disc=None):
    """Rotation-invariant measures on the disk: ``P_n = z**n`` and the ratio is exactly 1.

    Records the achieved ``||P_n||**q`` against the closed-form ``c_{qn}(tau)``,
    the largest lower-order coefficient (should vanish) and the norm ratio.
    Every entry must sit within ``tol``.
    """
    _check_resolution(n_theta, n_list)
    if mu.map.kind != "disk" or mu.m or mu.ell or mu.angular.name != "uniform" or mu.h.name != "one":
        raise ValueError("exact check needs a rotation-invariant measure on the disk")
    disc = disc or discretize(mu, n_theta, n_r)
    basis = OrthoBasis.build(disc, max(n_list))
    rep = DiagnosticsReport("exact", list(n_list))
    for n in n_list:
        sol = solve_monic(disc, n, q, basis=basis)
        Fq = sol.norm_q**q
        c = closed_form_moment(mu.radial, q * n)
        if c is None:
            c = _tau_moment(mu, q * n)
        coeffs = sol.poly.monomial_form().coeffs
        rep.add("norm", n, q, Fq, c, abs(Fq - c) / c)
        rep.add("coeff_max", n, q, float(np.max(np.abs(coeffs), initial=0.0)), 0.0)
        rep.add("ratio", n, q, Fq / c, 1.0)
    for quantity in ("norm", "coeff_max", "ratio"):
        _, devs = _deviations(rep, quantity)
        ok = bool(devs.size) and float(devs.max()) <= tol
        rep.verdicts[quantity] = ok
        _mark(rep, quantity, ok)
    return rep


def faber_weak_limit(mu, q, k_list, n_list, n_theta=512, n_r=64, shift=0, tol=DEFAULT_TOL, disc=None):
    """``int phi**k |F_{n-shift}|**q d mu / c_{q(n-shift)}(tau)`` against ``int e^{ik theta} h d nu``.

    Exterior and boundary atoms are left out: the weak limit concerns the
    push-forward part together with the interior perturbations.
    """
    _check_resolution(n_theta, n_list)
    disc = disc or discretize(mu, n_theta, n_r)
    keep = np.ones(disc.size, dtype=bool)
    keep[disc.exterior_idx] = False
    keep[disc.boundary_idx] = False
    x, w = disc.nodes[keep], disc.weights[keep]
    phi = _phi_at_nodes(mu, disc)[keep]
    rep = DiagnosticsReport("faber_weak")
    rep.degrees = list(n_list)
    limits = {k: _boundary_moment(mu, k) for k in k_list}
    for n in n_list:
        m = n - shift
        F = np.abs(faber(mu.map, m)(x)) ** q
        c = _tau_moment(mu, q * m)
        for k in k_list:
            val = complex(np.sum(w * phi**k * F) / c)
            rep.add(f"k={k}", n, q, val.real, limits[k].real, abs(val - limits[k]))
    for k in k_list:
        _, devs = _deviations(rep, f"k={k}")
        ok = last_quarter_mean(devs) <= tol * max(1.0, abs(limits[k]))
        rep.verdicts[f"k={k}"] = bool(ok)
        _mark(rep, f"k={k}", ok)
    rep.summary["limits"] = {str(k): [v.real, v.imag] for k, v in limits.items()}
    return rep


def _deviations(rep, quantity):
    name = f"{rep.experiment}/{quantity}"
    recs = [r for r in rep.records if r.experiment == name]
    return np.array([r.n for r in recs]), np.array([r.deviation for r in recs])


def _boundary_moment(mu, k, n_theta=4096):
    f, bps = boundary_weight(mu)
    theta, wt = angular_rule(n_theta, bps)
    val = np.sum(wt * np.exp(1j * k * theta) * f(theta))
    for t, m in mu.angular.atoms:
        val += m * np.exp(1j * k * t) * mu.h(np.exp(1j * t))
    return complex(val)


def weak_moment_table(mu, q, k_list, n_list, n_theta=512, n_r=64, r_K=0.9, tol=DEFAULT_TOL, disc=None):
    """Moments of ``|p_n|**q d mu`` (``p_n = P_n / ||P_n||_q``) against the equilibrium measure.

    Records ``int phi**k |p_n|**q d mu`` (limit 0 for ``k >= 1``), the mass on
    the compact set ``{|phi| <= r_K}`` plus ``sigma1`` (limit 0), the total
    exterior-atom mass ``sum alpha_j |p_n(z_j)|**q`` (limit 0), and the same
    moments of the normalized kernel ``sum_{j<=n} |p_j(z;mu,2)|**2 / (n+1)``.
    """
    _check_resolution(n_theta, n_list)
    disc = disc or discretize(mu, n_theta, n_r)
    phi = _phi_at_nodes(mu, disc)
    if mu.m:
        phi[disc.exterior_idx] = [phi_eval(mu.map, z) for z, _ in mu.exterior_atoms]
    with np.errstate(invalid="ignore"):
        compact = (disc.provenance == "sigma1") | (np.abs(disc.preimage) <= r_K)
    rep = DiagnosticsReport("weak_moments", list(n_list))
    basis = OrthoBasis.build(disc, max(n_list))
    P2 = np.abs(basis.Q / basis.sqrt_w[:, None]) ** 2
    kernel_sums = np.cumsum(P2, axis=1)
    w = disc.weights
    for n in n_list:
        sol = solve_monic(disc, n, q, basis=basis)
        dens = w * np.abs(sol.poly(disc.nodes)) ** q / sol.norm_q**q
        for k in k_list:
            val = complex(np.sum(phi**k * dens))
            rep.add(f"k={k}", n, q, val.real, 0.0, abs(val))
        rep.add("compact_mass", n, q, float(np.sum(dens[compact])), 0.0)
        rep.add("atom_mass", n, q, float(np.sum(dens[disc.exterior_idx])), 0.0)
        kdens = w * kernel_sums[:, n] / (n + 1)
        for k in k_list:
            val = complex(np.sum(phi**k * kdens))
            rep.add(f"kernel_k={k}", n, q, val.real, 0.0, abs(val))
    n_last = n_list[-1]
    for quantity in [f"k={k}" for k in k_list] + ["compact_mass", "atom_mass"]:
        recs = [r for r in rep.records if r.experiment == f"weak_moments/{quantity}" and r.n == n_last]
        ok = all(r.deviation <= tol for r in recs)
        rep.verdicts[quantity] = bool(ok)
        _mark(rep, quantity, ok)
    return rep


def _distance_to_region(mu, z, n=4096):
    theta = 2 * np.pi * np.arange(n) / n
    bd = psi_eval(mu.map, np.exp(1j * theta))
    return float(np.min(np.abs(bd - z)))


def attraction_radii(mu):
    """Half the distance from each exterior atom to the region and to the other atoms."""
    pts = [z for z, _ in mu.exterior_atoms]
    out = []
    for i, z in enumerate(pts):
        d = _distance_to_region(mu, z)
        for j, other in enumerate(pts):
            if j != i:
                d = min(d, abs(z - other))
        out.append(0.5 * d)
    return out


def zero_attraction_trace(mu, q, n_list, n_theta=512, n_r=64, delta=None, single_from=10,
                          min_rate=0.2, floor=1e-13, disc=None):
    """Track the zero of ``P_n`` nearest each exterior atom.

    Records the distance ``|w_{i,n} - z_i|`` and the number of zeros in the
    ``delta``-ball around ``z_i``.  The attraction exponent is minus the
    least-squares slope of ``log(distance)`` against ``n``, fitted only on
    distances above ``floor * max(1, |z_i|)`` (below that the root is not
    resolved in double precision).
    """
    if not mu.m:
        raise ValueError("zero attraction needs exterior atoms")
    disc = disc or discretize(mu, n_theta, n_r)
    radii = delta if delta is not None else attraction_radii(mu)
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (mu.m,))
    rep = DiagnosticsReport("zeros", list(n_list))
    basis = OrthoBasis.build(disc, max(n_list))
    atoms = [z for z, _ in mu.exterior_atoms]
    for n in n_list:
        sol = solve_monic(disc, n, q, basis=basis)
        try:
            roots = poly_roots(sol.poly.monomial_form())
        except ConvergenceError as exc:
            rep.errors.append(f"n={n}: root refinement failed: {exc}")
            continue
        for i, z in enumerate(atoms):
            d = np.abs(roots - z)
            j = int(np.argmin(d))
            rep.add(f"atom{i}/distance", n, q, d[j])
            rep.add(f"atom{i}/count", n, q, int(np.sum(d < radii[i])), 1.0)
            rep.add(f"atom{i}/root_re", n, q, roots[j].real)
            rep.add(f"atom{i}/root_im", n, q, roots[j].imag)
    fits = {}
    for i, z in enumerate(atoms):
        ns, dist = rep.series(f"atom{i}/distance")
        good = dist > floor * max(1.0, abs(z))
        slope = float(np.polyfit(ns[good], np.log(dist[good]), 1)[0]) if good.sum() >= 2 else float("nan")
        ns_c, counts = rep.series(f"atom{i}/count")
        late = ns_c >= single_from
        single = bool(late.any() and np.all(counts[late] == 1))
        fits[f"atom{i}"] = {"slope": slope, "exponent": -slope, "delta": float(radii[i]),
                            "fitted_degrees": ns[good].astype(int).tolist(), "single_zero": single}
        rep.verdicts[f"atom{i}/slope"] = bool(slope <= -min_rate)
        rep.verdicts[f"atom{i}/single_zero"] = single
        _mark(rep, f"atom{i}/distance", slope <= -min_rate)
        _mark(rep, f"atom{i}/count", single)
    rep.summary["fits"] = fits
    return rep


def default_sample_points(radii=(1.5, 2.0, 3.0), rays=8):
    t = 2 * np.pi * np.arange(rays) / rays
    return np.concatenate([r * np.exp(1j * t) for r in radii])


def szego_reference(mu, q, n_quad=2048):
    """``S_{1,inf}(.; q)`` for the weight ``h nu' |y_inf(psi)|**q`` on the unit circle."""
    f, bps = boundary_weight(mu)
    y = y_infinity(mu)
    mp = mu.map

    def logd(theta):
        out = _clamped_log(f(theta))
        if mu.m:
            out = out + q * np.log(np.abs(y(psi_eval(mp, np.exp(1j * theta)))))
        return out

    return SzegoFunction(q, logd, n_quad=n_quad, breakpoints=bps)


def lambda_n(poly, roots_near):
    """``P_n / y_n`` by backward deflation of the located roots."""
    for r in roots_near:
        poly = deflate(poly, r)
    return poly


def strong_ratio_field(mu, q, n_list, sample_w=None, n_theta=512, n_r=64, tol=0.02,
                       kappa_exponent=2.0, judge_radius=2.0, disc=None):
    """Deviation ``|Lambda_n(psi(w)) S(w) / (w**(n-m) S(inf)) - 1|`` at exterior sample points.

    ``sample_w`` are points in the ``w``-plane (``|w| >= 1.05``).  Also records
    the ratio ``Lambda_n / P_{n-m}(kappa)`` for the boundary measure
    ``kappa = |y_inf|**kappa_exponent psi_*(h nu)``.
    """
    sample_w = default_sample_points() if sample_w is None else np.asarray(sample_w, dtype=complex)
    if np.any(np.abs(sample_w) < 1.05):
        raise DomainError("sample points must satisfy |phi(z)| >= 1.05")
    disc = disc or discretize(mu, n_theta, n_r)
    z = psi_eval(mu.map, sample_w)
    S = szego_reference(mu, q)
    S_w, S_inf = S(sample_w), S.at_infinity()
    basis = OrthoBasis.build(disc, max(n_list))
    m = mu.m
    atoms = [a for a, _ in mu.exterior_atoms]
    y = y_infinity(mu)
    kdisc = mu.boundary_measure(extra=y if m else None, exponent=kappa_exponent).discretize(n_theta)
    kbasis = OrthoBasis.build(kdisc, max(n_list) - m)
    rep = DiagnosticsReport("strong", list(n_list))
    mods = np.round(np.abs(sample_w), 12)
    for n in n_list:
        sol = solve_monic(disc, n, q, basis=basis)
        P = sol.poly.monomial_form()
        if m:
            try:
                roots = poly_roots(P)
            except ConvergenceError as exc:
                rep.errors.append(f"n={n}: {exc}")
                continue
            near = [roots[np.argmin(np.abs(roots - a))] for a in atoms]
            lam = lambda_n(P, near)(z)
        else:
            lam = sol.poly(z)
        dev = np.abs(lam * S_w / (sample_w ** (n - m) * S_inf) - 1.0)
        Pk = solve_monic(kdisc, n - m, q, basis=kbasis).poly
        dev_k = np.abs(lam / Pk(z) - 1.0)
        for r in np.unique(mods):
            sel = mods == r
            rep.add(f"|w|={r:g}", n, q, float(dev[sel].max()), 0.0)
            rep.add(f"stoutlim/|w|={r:g}", n, q, float(dev_k[sel].max()), 0.0)
    n_last = max(n_list)
    for r in np.unique(mods):
        recs = [x for x in rep.records if x.experiment == f"strong/|w|={r:g}" and x.n == n_last]
        ok = bool(recs) and recs[0].value <= tol
        if np.isclose(r, judge_radius):
            rep.verdicts[f"|w|={r:g}"] = ok
            _mark(rep, f"|w|={r:g}", ok)
    rep.summary["S_inf"] = S_inf
    rep.summary["kappa_exponent"] = kappa_exponent
    return rep


def moment_ratio_trace(tau, q, n_list, tol=0.01, log_floor=None):
    """``c_{q(n+1)}/c_{qn}`` and ``c_{qn}**(1/(qn))`` with a verdict on ``1 in supp(tau)``.

    Both sequences tend to 1 exactly when 1 is in the support.  The verdict
    reads the last degree: both values within ``tol`` of 1.  Also records
    ``c_{qn} log2(qn)**2``; with ``log_floor`` set, every entry must stay above it.
    """
    log_mass = log_radial_moment(tau, 0.0)
    rep = DiagnosticsReport("moment_ratio", list(n_list))
    scaled = []
    for n in n_list:
        lc = log_radial_moment(tau, q * n) - log_mass
        lc1 = log_radial_moment(tau, q * (n + 1)) - log_mass
        rep.add("ratio", n, q, np.exp(lc1 - lc))
        rep.add("root", n, q, np.exp(lc / (q * n)))
        s = np.exp(lc) * np.log2(q * n) ** 2 if q * n > 1 else float("nan")
        rep.add("log_scaled", n, q, s, log_floor)
        scaled.append(s)
    _, ratio = rep.series("ratio")
    _, root = rep.series("root")
    contains_one = bool(ratio[-1] >= 1 - tol and root[-1] >= 1 - tol)
    rep.summary["contains_one"] = contains_one
    if log_floor is not None:
        vals = np.asarray(scaled)
        ok = bool(np.all(vals[np.isfinite(vals)] >= log_floor))
        rep.verdicts["log_floor"] = ok
        _mark(rep, "log_scaled", ok)
    return rep


SPARSE_LOG_CONSTANT = 6.0 / (16.0 * np.pi**2)


def lemniscate_prediction(h=None, n_quad=4096):
    """Geometric mean of the push-forward of ``h`` times arc length on ``|z**3 - 1| = 1``.

    The density with respect to ``d theta / 2 pi`` is
    ``2 pi h(psi(e^{i theta})) |1 + e^{3 i theta}|**(-2/3)``; the last factor has
    geometric mean 1 (mean of ``log|1 + e^{i t}|`` is 0), so the answer is
    ``2 pi G(h o psi)``.
    """
    if h is None:
        return 2 * np.pi
    theta = 2 * np.pi * (np.arange(n_quad) + 0.5) / n_quad
    w = np.exp(1j * theta)
    z = w * (1.0 + w ** (-3)) ** (1.0 / 3.0)
    return float(2 * np.pi * np.exp(np.mean(np.log(h(z)))))


def lemniscate_ratio_sequence(tau, q, n_list, h=None, n_theta=512, n_r=16, tol=DEFAULT_TOL):
    """``||P_{3n}||_q**q / c_{qn}(tau)`` on the cubic lemniscate region, against the upper bound."""
    disc = lemniscate_measure(tau, h=h, n_theta=n_theta, n_r=n_r)
    pred = lemniscate_prediction(h)
    rep = DiagnosticsReport("lemniscate", list(n_list))
    basis = OrthoBasis.build(disc, 3 * max(n_list))
    worst = 0.0
    for n in n_list:
        sol = solve_monic(disc, 3 * n, q, basis=basis)
        ratio = sol.norm_q**q / radial_moment(tau, q * n)
        rep.add("ratio", n, q, ratio, pred, ratio / pred - 1.0)
        worst = max(worst, ratio / pred)
    ok = worst <= 1.0 + tol
    rep.verdicts["upper_bound"] = bool(ok)
    _mark(rep, "ratio", ok)
    rep.summary.update(prediction=pred, worst_relative=worst)
    return rep
