"""Monic L^q-extremal polynomials on discretized measures.

The ``q = 2`` problem is solved by Arnoldi orthogonalization of the weighted
Krylov sequence ``sqrt(w) * x**k``.  Other exponents use iteratively reweighted
least squares (IRLS) in the resulting orthonormal coordinates, warm-started from
the ``q = 2`` solution.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .errors import ConvergenceError, DegenerateMeasureError, SymmetryError
from .measure import Discretization
from .polynomial import MonicPolynomial, poly_roots  # noqa: F401  (re-export)

RANK_TOL = 1e-13
STALL_RESIDUAL = 1e-5


@dataclass(eq=False)
class OrthoBasis:
    """Orthonormal polynomials ``p_0..p_n`` of a discrete measure.

    ``Q[:, k] = sqrt(w) * p_k(x)`` has orthonormal columns and
    ``x * Q[:, k] = sum_{j <= k+1} H[j, k] Q[:, j]``.
    """

    nodes: np.ndarray
    sqrt_w: np.ndarray
    Q: np.ndarray
    H: np.ndarray

    @classmethod
    def build(cls, disc, n):
        x = disc.nodes
        s = np.sqrt(disc.weights)
        if np.count_nonzero(s) < n + 1 or np.unique(np.round(x[s > 0], 14)).size < n + 1:
            raise DegenerateMeasureError(f"measure has fewer than {n + 1} distinct support points")
        N = x.size
        Q = np.zeros((N, n + 1), dtype=complex)
        H = np.zeros((n + 1, n), dtype=complex)
        beta0 = np.linalg.norm(s)
        Q[:, 0] = s / beta0
        for k in range(n):
            v = x * Q[:, k]
            scale = np.linalg.norm(v)
            for _ in range(2):  # classical Gram-Schmidt, twice
                c = Q[:, : k + 1].conj().T @ v
                v = v - Q[:, : k + 1] @ c
                H[: k + 1, k] += c
            hk = np.linalg.norm(v)
            if hk <= RANK_TOL * max(scale, 1e-300):
                raise DegenerateMeasureError(f"Krylov sequence lost rank at degree {k + 1}")
            H[k + 1, k] = hk
            Q[:, k + 1] = v / hk
        basis = cls(x, s, Q, H)
        basis.beta0 = beta0
        return basis

    @property
    def n(self):
        return self.H.shape[1]

    def monic_norms(self):
        """``||P_k||_2`` for ``k = 0..n``."""
        h = np.real(np.diag(self.H, -1))
        return self.beta0 * np.concatenate([[1.0], np.cumprod(h)])

    def eval(self, z, upto=None):
        """Rows ``p_0(z)..p_upto(z)`` by the Arnoldi recurrence."""
        upto = self.n if upto is None else upto
        z = np.asarray(z, dtype=complex)
        P = np.zeros((upto + 1,) + z.shape, dtype=complex)
        P[0] = 1.0 / self.beta0
        for k in range(upto):
            acc = z * P[k]
            for j in range(k + 1):
                acc = acc - self.H[j, k] * P[j]
            P[k + 1] = acc / self.H[k + 1, k]
        # at a weighted node the Arnoldi vectors give the values without the
        # cancellation the recurrence suffers outside the bulk of the support
        flat = z.ravel()
        hit = np.flatnonzero(np.isin(flat, self.nodes[self.sqrt_w > 0]))
        if hit.size:
            lookup = {complex(x): i for i, x in enumerate(self.nodes) if self.sqrt_w[i] > 0}
            rows = P.reshape(upto + 1, -1)
            for j in hit:
                i = lookup[complex(flat[j])]
                rows[:, j] = self.Q[i, : upto + 1] / self.sqrt_w[i]
        return P

    def coefficients(self, upto=None):
        """Ascending monomial coefficients of ``p_0..p_upto`` (rows)."""
        upto = self.n if upto is None else upto
        C = np.zeros((upto + 1, upto + 1), dtype=complex)
        C[0, 0] = 1.0 / self.beta0
        for k in range(upto):
            acc = np.zeros(upto + 1, dtype=complex)
            acc[1:] = C[k, :-1]
            acc -= self.H[: k + 1, k] @ C[: k + 1]
            C[k + 1] = acc / self.H[k + 1, k]
        return C

    def monic(self, k=None):
        """The ``q = 2`` extremal ``P_k`` in monomial form."""
        k = self.n if k is None else k
        c = self.coefficients(k)[k]
        return MonicPolynomial(c[:k] / c[k])


@dataclass(frozen=True, eq=False)
class BasisPolynomial(MonicPolynomial):
    """Monic polynomial that also knows its orthonormal-basis coordinates.

    ``P = lead * p_n + sum_{k<n} coords[k] p_k``.  Evaluation uses the basis
    recurrence, which stays accurate where Horner's rule on monomial
    coefficients cancels catastrophically (e.g. at an atom outside the
    support, where ``|P|`` is many orders below ``sum |a_k| |z|**k``).
    """

    basis: OrthoBasis = None
    coords: np.ndarray = None
    lead: float = 1.0

    def __call__(self, z):
        if self.basis is None:
            return super().__call__(z)
        n = self.degree
        b = self.basis
        if np.shape(z) == b.nodes.shape and np.array_equal(z, b.nodes) and np.all(b.sqrt_w > 0):
            # values at the measure's own nodes come straight from the Arnoldi vectors
            return (self.lead * b.Q[:, n] + b.Q[:, :n] @ self.coords) / b.sqrt_w
        rows = b.eval(z, upto=n)
        out = self.lead * rows[n]
        if n:
            out = out + np.tensordot(self.coords, rows[:n], axes=1)
        return out

    def monomial_form(self):
        return MonicPolynomial(self.coeffs)


@dataclass
class ExtremalSolution:
    poly: MonicPolynomial
    q: float
    norm_q: float
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    certified: bool = True
    method: str = "orthogonalization"
    basis_coeffs: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.poly.degree


def eval_norm(disc, poly, q):
    """``(sum w |poly(x)|**q)**(1/q)``."""
    vals = np.abs(poly(disc.nodes))
    return float(np.sum(disc.weights * vals**q) ** (1.0 / q))


def _objective(vals, w, q):
    return float(np.sum(w * np.abs(vals) ** q))


def _residual(Pv, pk_vals, w, q, F):
    """Scaled first-order optimality measure, in ``[0, 1]``.

    ``g_k = sum w |P|**(q-2) P conj(p_k)`` vanishes at the minimizer; by Hoelder
    ``|g_k| <= F**((q-1)/q) ||p_k||_q`` so the ratio is dimensionless.
    """
    if F == 0:
        return 0.0
    a = np.abs(Pv)
    # below the rounding level the phase of P is noise; for q < 2 use the
    # zero subgradient there
    live = a > (1e-12 * a.max() if q < 2 else 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(live, a ** (q - 2.0), 0.0)
    g = (w * weight * Pv) @ pk_vals.conj()
    pk_norm = np.sum(w[:, None] * np.abs(pk_vals) ** q, axis=0) ** (1.0 / q)
    return float(np.max(np.abs(g) / (F ** ((q - 1.0) / q) * pk_norm)))


def irls(base, A, w, q, c0=None, tol=1e-11, step_tol=1e-10, max_iter=500, floor=1e-12):
    """Minimize ``sum w |base + A c|**q`` over complex ``c``.

    ``base`` and ``A`` are values at the nodes (unweighted).  Each step solves
    the weighted least-squares problem with weights ``w |P|**(q-2)`` (``|P|``
    clamped below at ``floor * max |P|``), damped by ``1/(q-1)`` for ``q > 2``,
    with backtracking so the objective never increases.
    Returns ``(c, F, iterations, converged)``.
    """
    n = A.shape[1]
    c = np.zeros(n, dtype=complex) if c0 is None else np.asarray(c0, dtype=complex).copy()
    P = base + A @ c
    F = _objective(P, w, q)
    damping = 1.0 / (q - 1.0) if q > 2 else 1.0
    for it in range(1, max_iter + 1):
        a = np.abs(P)
        a = np.maximum(a, floor * max(a.max(), 1e-300))
        omega = np.sqrt(w * a ** (q - 2.0))
        target, *_ = np.linalg.lstsq(omega[:, None] * A, -omega * base, rcond=None)
        step = damping * (target - c)
        t = 1.0
        while True:
            c_new = c + t * step
            P_new = base + A @ c_new
            F_new = _objective(P_new, w, q)
            if F_new <= F or t < 1e-6:
                break
            t *= 0.5
        if F_new > F:
            return c, F, it, False
        rel = (F - F_new) / max(F, 1e-300)
        dc = np.linalg.norm(c_new - c) / max(1.0, np.linalg.norm(c_new))
        c, P, F = c_new, P_new, F_new
        if rel < tol and dc < step_tol:
            return c, F, it, True
    return c, F, max_iter, False


def solve_monic(disc, n, q, basis=None, max_iter=500, tol=1e-11, warm=None, res_tol=None, method="auto"):
    """Monic degree-``n`` minimizer of ``sum w |P(x)|**q``.

    ``q = 2`` is the orthogonalization path.  Other ``q`` run IRLS in the
    orthonormal coordinates ``P = P_n^{(2)} + sum_{k<n} c_k p_k``.  When ``q <= 1``
    the problem is not convex: several warm starts are tried, the best is kept
    and the result is marked as not certified.

    A start whose optimality residual is already below ``res_tol`` is accepted
    without iterating.  The default is 1e-12 for ``q >= 2`` and 1e-6 for
    ``q < 2``, where ``|P|**(q-2)`` amplifies rounding at near-zeros of ``P``;
    for a convex objective the resulting suboptimality is of order ``res_tol**2``.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if n == 0:
        poly = MonicPolynomial(np.zeros(0))
        return ExtremalSolution(poly, q, eval_norm(disc, poly, q))
    basis = basis if basis is not None and basis.n >= n else OrthoBasis.build(disc, n)
    w = disc.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_s = np.where(basis.sqrt_w > 0, 1.0 / basis.sqrt_w, 0.0)
    pk = basis.Q[:, :n] * inv_s[:, None]
    lead = basis.monic_norms()[n]
    base = lead * basis.Q[:, n] * inv_s
    coeffs = basis.coefficients(n)
    if q == 2 and method == "auto" and warm is None:
        poly = BasisPolynomial(coeffs[n, :n] / coeffs[n, n], basis, np.zeros(n, dtype=complex), lead)
        F = _objective(base, w, 2.0)
        return ExtremalSolution(
            poly, 2.0, eval_norm(disc, poly, 2.0), 0, _residual(base, pk, w, 2.0, F),
            basis_coeffs=np.zeros(n, dtype=complex),
        )

    if res_tol is None:
        res_tol = 1e-12 if q >= 2 else 1e-6
    starts = [np.zeros(n, dtype=complex) if warm is None else np.asarray(warm, dtype=complex)]
    if q <= 1:
        rng = np.random.default_rng(0)
        starts += [0.3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * lead for _ in range(3)]
    best = None
    for i, c0 in enumerate(starts):
        P0 = base + pk @ c0
        F0 = _objective(P0, w, q)
        # q >= 1 is convex, so a stationary point is a global minimizer
        if q >= 1 and _residual(P0, pk, w, q, F0) < res_tol:
            result = (c0, F0, 0, True)
            if i == 0:
                best = result
                break
        else:
            result = irls(base, pk, w, q, c0=c0, tol=tol, max_iter=max_iter)
        # later starts must win by more than rounding
        if best is None or result[1] < best[1] * (1.0 - 1e-13):
            best = result
    c, F, iters, converged = best
    full = lead * coeffs[n] + c @ coeffs[:n]
    poly = BasisPolynomial(full[:n] / full[n], basis, c, lead)
    P = base + pk @ c
    res = _residual(P, pk, w, q, F)
    # a stall with a small gradient is rounding at the optimum, not failure
    converged = converged or (q > 1 and res < STALL_RESIDUAL)
    if not converged:
        warnings.warn(f"IRLS stopped after {iters} iterations (q={q}, n={n})", RuntimeWarning, stacklevel=2)
    return ExtremalSolution(
        poly,
        float(q),
        eval_norm(disc, poly, q),
        iters,
        res,
        converged=converged,
        certified=q > 1,
        method="irls",
        basis_coeffs=c,
    )


def orthonormal_sequence(disc, n_max):
    """Orthonormal polynomials ``p_0..p_{n_max}`` as an :class:`OrthoBasis`.

    The basis evaluates ``p_k`` stably through its recurrence; monomial
    coefficients are available from ``coefficients()``.  If the measure does not
    support degree ``n_max`` the error names the largest usable degree.
    """
    try:
        return OrthoBasis.build(disc, n_max)
    except DegenerateMeasureError:
        lo, hi = 0, n_max
        while lo < hi:
            mid = (lo + hi + 1) // 2
            try:
                OrthoBasis.build(disc, mid)
                lo = mid
            except DegenerateMeasureError:
                hi = mid - 1
        raise DegenerateMeasureError(f"orthonormalization fails past degree {lo}") from None


def _check_symmetric(disc, tol=1e-12):
    x = disc.nodes
    if np.any(np.abs(x.imag) > tol):
        raise SymmetryError("measure must live on the real line")
    xr = x.real
    if np.any((np.abs(xr) < 1.0 - tol) | (np.abs(xr) > 2.0 + tol)):
        raise SymmetryError("support must lie in [-2, -1] U [1, 2]")
    order_p = np.lexsort((disc.weights, xr))
    order_m = np.lexsort((disc.weights, -xr))
    if not (np.allclose(xr[order_p], -xr[order_m], atol=tol) and np.allclose(disc.weights[order_p], disc.weights[order_m], rtol=tol)):
        raise SymmetryError("measure is not symmetric under z -> -z")


@dataclass
class NonuniquenessScan:
    a_grid: np.ndarray
    norms: np.ndarray
    q_poly: MonicPolynomial
    minimum: float
    flat_interval: tuple
    minimizers: tuple

    @property
    def minimizer_distance(self):
        a, b = self.minimizers
        return float(np.linalg.norm(a.full - b.full))


def l1_nonuniqueness_scan(disc, n, a_grid, flat_tol=1e-10):
    """Scan ``a -> ||(z - a) Q(z)||_1`` for a symmetric measure on ``[-2,-1] U [1,2]``.

    ``Q`` is even and monic of degree ``n - 1`` and makes ``z Q`` an odd
    L^1-extremal polynomial; it is found from the reduced problem in ``u = z**2``
    with weights ``w |x|``.  The scan reports the interval where the norm stays
    within ``flat_tol`` of its minimum and emits the two endpoint minimizers.
    """
    if n % 2 != 1:
        raise ValueError("n must be odd")
    _check_symmetric(disc)
    x = disc.nodes.real
    if n == 1:
        Q = MonicPolynomial(np.zeros(0))
    else:
        pos = x > 0
        reduced = Discretization(x[pos] ** 2, 2.0 * disc.weights[pos] * x[pos], np.full(pos.sum(), "atom"))
        R = solve_monic(reduced, (n - 1) // 2, 1.0).poly
        full = np.zeros(n, dtype=complex)
        full[::2] = R.full
        Q = MonicPolynomial(full[:-1])
    a_grid = np.asarray(a_grid, dtype=float)
    qx = np.abs(Q(x))
    norms = np.array([np.sum(disc.weights * np.abs(x - a) * qx) for a in a_grid])
    best = norms.min()
    flat = np.flatnonzero(norms - best <= flat_tol * max(1.0, best))
    lo, hi = a_grid[flat[0]], a_grid[flat[-1]]

    def with_root(a):
        full = np.convolve(Q.full, [-a, 1.0])
        return MonicPolynomial(full[:-1])

    return NonuniquenessScan(a_grid, norms, Q, float(best), (float(lo), float(hi)), (with_root(lo), with_root(hi)))


def random_competitors(poly, count, scale=0.5, seed=0):
    """Monic perturbations of ``poly`` for extremality cross-checks."""
    rng = np.random.default_rng(seed)
    n = poly.degree
    for _ in range(count):
        d = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * rng.random()
        yield MonicPolynomial(poly.coeffs + d)


def check_convergence(sol):
    if not sol.converged:
        raise ConvergenceError(f"solver did not converge for n={sol.n}, q={sol.q}", last=sol)
    return sol
