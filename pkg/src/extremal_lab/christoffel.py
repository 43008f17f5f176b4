"""Christoffel functions ``lambda_n(z; mu, q) = inf { ||Q||_q**q : deg Q <= n, Q(z) = 1 }``."""

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsReport, _mark, last_quarter_mean
from .errors import DomainError
from .extremal import OrthoBasis, irls
from .measure import Discretization, mobius_pushforward


@dataclass
class ChristoffelResult:
    point: complex
    q: float
    degrees: np.ndarray
    values: np.ndarray
    method: str
    partial_sums: np.ndarray = field(default=None, repr=False)

    @property
    def limit(self):
        """Plateau estimate: mean over the last quarter of the degree grid."""
        return last_quarter_mean(self.values)


def lambda_kernel(disc, z, n_max):
    """``lambda_n = 1 / sum_{j<=n} |p_j(z)|**2`` for ``n = 0..n_max`` (``q = 2``)."""
    basis = OrthoBasis.build(disc, n_max)
    z = complex(z)
    hit = np.flatnonzero(disc.nodes == z)
    if hit.size:
        # at a node the Arnoldi vectors give the values directly
        i = hit[0]
        vals = basis.Q[i] / basis.sqrt_w[i]
    else:
        vals = basis.eval(np.array([z]))[:, 0]
    sums = np.cumsum(np.abs(vals) ** 2)
    return ChristoffelResult(z, 2.0, np.arange(n_max + 1), 1.0 / sums, "kernel", sums)


def _constrained_coordinates(disc, z, n):
    """Values ``(x - z) r_k(x)`` for an orthonormal basis ``r_k`` of ``w |x - z|**2``."""
    x = disc.nodes
    d = np.abs(x - z)
    live = (disc.weights > 0) & (d > 0)
    sub = Discretization(x[live], disc.weights[live] * d[live] ** 2, disc.provenance[live])
    basis = OrthoBasis.build(sub, n - 1)
    A = np.zeros((x.size, n), dtype=complex)
    A[live] = (x[live] - z)[:, None] * basis.Q / basis.sqrt_w[:, None]
    return A


def lambda_opt(disc, z, n, q, max_iter=500, tol=1e-12):
    """Minimize ``sum w |Q(x)|**q`` over ``Q = 1 + (x - z) R``, ``deg R <= n - 1``.

    Eliminating the constraint leaves an unconstrained problem in the
    coefficients of ``R``, solved by the same IRLS routine as the monic
    problem.  Returns ``(value, converged)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    A = _constrained_coordinates(disc, complex(z), n)
    base = np.ones(disc.size, dtype=complex)
    c, F, _, converged = irls(base, A, disc.weights, q, tol=tol, max_iter=max_iter)
    return float(F), converged


def lambda_opt_trace(disc, z, n_list, q):
    vals = []
    for n in n_list:
        vals.append(lambda_opt(disc, z, n, q)[0] if n >= 1 else float(np.sum(disc.weights)))
    return ChristoffelResult(complex(z), float(q), np.asarray(n_list), np.array(vals), "constrained-opt")


def christoffel_trace(disc, z, n_list, q):
    """Kernel path for ``q = 2``, constrained optimization otherwise."""
    n_list = np.asarray(n_list)
    if q == 2:
        res = lambda_kernel(disc, z, int(n_list.max()))
        return ChristoffelResult(res.point, 2.0, n_list, res.values[n_list], "kernel", res.partial_sums[n_list])
    return lambda_opt_trace(disc, z, n_list, q)


@dataclass
class MobiusCheck:
    x0: complex
    q: float
    lhs: ChristoffelResult
    rhs: ChristoffelResult

    @property
    def relative_gap(self):
        return abs(self.lhs.limit - self.rhs.limit) / max(self.lhs.limit, self.rhs.limit)


def mobius_invariance_check(disc, x0, q, n_list):
    """``lambda_n(x0; mu)`` against ``lambda_n(0; pushed mu)`` under the disk automorphism."""
    x0 = complex(x0)
    if abs(x0) >= 1:
        raise DomainError("need |x0| < 1")
    pushed = mobius_pushforward(disc, x0)
    return MobiusCheck(x0, q, christoffel_trace(disc, x0, n_list, q), christoffel_trace(pushed, 0.0, n_list, q))


CLOSED_FORMS = {
    "one": lambda n: 1.0,
    "inverse_n_plus_1": lambda n: 1.0 / (n + 1.0),
}


def _tag(z):
    z = complex(z)
    return f"z=({z.real:g},{z.imag:g})"


def boundary_mass(mu, z, tol=1e-12):
    """``mu({z})`` from the boundary and exterior atoms."""
    return float(sum(m for p, m in mu.boundary_atoms + mu.exterior_atoms if abs(p - z) <= tol))


def christoffel_report(mu, disc, q, n_list, exact=(), plateau=(), mobius=(), tol_exact=1e-10,
                       tol_plateau=0.05, tol_mobius=0.05):
    """Christoffel traces with verdicts.

    ``exact`` entries ``(z, formula)`` compare every ``lambda_n(z)`` with a named
    closed form from :data:`CLOSED_FORMS`; ``plateau`` entries ``(z, target)``
    compare the last-quarter mean with ``target`` (``None`` means ``mu({z})``);
    ``mobius`` entries ``x0`` compare plateaus at ``x0`` and at 0 of the pushed
    measure.
    """
    rep = DiagnosticsReport("christoffel", list(n_list))
    for z, formula in exact:
        if formula not in CLOSED_FORMS:
            raise ValueError(f"unknown closed form {formula!r}")
        res = christoffel_trace(disc, z, n_list, q)
        name = f"exact/{_tag(z)}"
        devs = []
        for n, v in zip(n_list, res.values):
            target = CLOSED_FORMS[formula](n)
            devs.append(abs(v - target) / target)
            rep.add(name, n, q, v, target, devs[-1])
        ok = max(devs) <= tol_exact
        rep.verdicts[name] = bool(ok)
        _mark(rep, name, ok)
    for z, target in plateau:
        target = boundary_mass(mu, z) if target is None else float(target)
        res = christoffel_trace(disc, z, n_list, q)
        name = f"plateau/{_tag(z)}"
        for n, v in zip(n_list, res.values):
            rep.add(name, n, q, v, target)
        est = res.limit
        ok = abs(est - target) <= tol_plateau * max(target, 1e-300) if target > 0 else est <= tol_plateau
        rep.summary[name] = {"plateau": est, "target": target}
        rep.verdicts[name] = bool(ok)
        _mark(rep, name, ok)
    for x0 in mobius:
        chk = mobius_invariance_check(disc, x0, q, n_list)
        name = f"mobius/x0=({complex(x0).real:g},{complex(x0).imag:g})"
        for n, a, b in zip(n_list, chk.lhs.values, chk.rhs.values):
            rep.add(name, n, q, a, b, abs(a - b) / max(a, b))
        ok = chk.relative_gap <= tol_mobius
        rep.summary[name] = {"lhs_plateau": chk.lhs.limit, "rhs_plateau": chk.rhs.limit, "gap": chk.relative_gap}
        rep.verdicts[name] = bool(ok)
        _mark(rep, name, ok)
    return rep
