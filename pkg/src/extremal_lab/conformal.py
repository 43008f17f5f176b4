"""Exterior conformal maps, Green function, equilibrium moments, Faber polynomials.

An :class:`ExteriorMap` represents ``psi``, the conformal map of ``{|w| > 1}`` onto
the exterior of a compact region with capacity 1, normalized so that
``psi(w) = w + xi_0 + xi_1/w + ...``.  Two constructive families are supported:

* ``laurent``: a finite Laurent polynomial ``w + sum_k xi_k w**(-k)``;
* ``power_family``: ``psi(w) = (w**p + c)**(1/p)``, equivalently
  ``phi(z)**p = z**p - c``.  With ``p=3, c=1`` this is the cubic lemniscate
  ``{|z**3 - 1| < 1}``.

The disk (``psi = id``) is its own kind so the annulus can extend to ``r = 0``.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import binom

from .errors import ConvergenceError, DomainError, TruncationError
from .polynomial import MonicPolynomial
from .quadrature import periodic_trapezoid

KINDS = ("disk", "laurent", "power_family")
MAX_FABER_DEGREE = 200


@dataclass(frozen=True, eq=False)
class ExteriorMap:
    kind: str
    laurent_coeffs: tuple = ()
    power_params: tuple = (1, 0j)
    rho_tilde: float = 0.0
    rho: float = 0.0
    truncation_order: int = 4 * MAX_FABER_DEGREE

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind != "disk":
            if not (0.0 <= self.rho_tilde <= self.rho <= 1.0):
                raise ValueError("need 0 <= rho_tilde <= rho <= 1")
            if self.rho_tilde < 1.0 and not self.rho_tilde < self.rho < 1.0:
                raise ValueError("need rho_tilde < rho < 1")

    # -- constructors -----------------------------------------------------

    @classmethod
    def disk(cls):
        return cls("disk")

    @classmethod
    def laurent(cls, coeffs, rho=None, rho_tilde=None, truncation_order=None, check=True):
        """``psi(w) = w + coeffs[0] + coeffs[1]/w + ... + coeffs[K]/w**K``."""
        xi = tuple(complex(c) for c in coeffs) or (0j,)
        crit = _critical_radius(xi)
        rt = crit if rho_tilde is None else float(rho_tilde)
        if rt < crit:
            raise ValueError(f"rho_tilde={rt} is below the critical-point radius {crit:.6g}")
        if rt >= 1.0:
            raise ValueError("psi is not univalent on a neighborhood of the unit circle")
        r = 0.5 * (rt + 1.0) if rho is None else float(rho)
        m = cls(
            "laurent",
            laurent_coeffs=xi,
            rho_tilde=rt,
            rho=r,
            truncation_order=truncation_order or 4 * MAX_FABER_DEGREE,
        )
        if check:
            check_injective(m)
        return m

    @classmethod
    def power_family(cls, p, c, rho=None):
        """``phi(z)**p = z**p - c``.

        The branch points of ``psi`` sit on ``|w| = |c|**(1/p)``.  For ``|c| = 1``
        (the lemniscate) there is no annulus of univalence inside the unit circle;
        such a map only supports boundary and exterior operations.
        """
        p = int(p)
        c = complex(c)
        if p < 1:
            raise ValueError("p must be a positive integer")
        if abs(c) > 1.0:
            raise ValueError("|c| > 1 puts branch points outside the unit circle")
        rt = abs(c) ** (1.0 / p)
        if rt >= 1.0:
            r = 1.0
        else:
            r = 0.5 * (rt + 1.0) if rho is None else float(rho)
        return cls("power_family", power_params=(p, c), rho_tilde=rt, rho=r)

    @property
    def has_annulus(self):
        return self.kind == "disk" or self.rho < 1.0

    @property
    def xi(self):
        return np.array(self.laurent_coeffs, dtype=complex)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "laurent":
            d["coeffs"] = [[c.real, c.imag] for c in self.laurent_coeffs]
            d["rho_tilde"] = self.rho_tilde
            d["rho"] = self.rho
        elif self.kind == "power_family":
            p, c = self.power_params
            d["p"] = p
            d["c"] = [c.real, c.imag]
            d["rho"] = self.rho
        return d

    # -- evaluation --------------------------------------------------------

    def psi(self, w):
        return psi_eval(self, w)

    def dpsi(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "disk":
            return np.ones_like(w)
        if self.kind == "laurent":
            out = np.ones_like(w)
            for k, x in enumerate(self.laurent_coeffs[1:], start=1):
                out = out - k * x * w ** (-k - 1)
            return out
        p, _ = self.power_params
        return (w / self.psi(w)) ** (p - 1)

    def phi(self, z, **kwargs):
        return phi_eval(self, z, **kwargs)


def _critical_radius(xi):
    # psi'(w) = 1 - sum k xi_k w^(-k-1); multiply by w^(K+1)
    K = len(xi) - 1
    if K < 1 or not np.any(np.asarray(xi[1:])):
        return 0.0
    poly = np.zeros(K + 2, dtype=complex)  # descending powers of w
    poly[0] = 1.0
    for k in range(1, K + 1):
        poly[K + 1 - (K - k)] -= k * xi[k]
    roots = np.roots(poly)
    return float(np.max(np.abs(roots))) if roots.size else 0.0


def check_injective(m, n_radii=12, n_angles=64, tol=1e-9):
    """Sample ``{rho <= |w| <= 3}`` and assert distinct points have distinct images."""
    r = np.linspace(m.rho, 3.0, n_radii)
    t = 2 * np.pi * (np.arange(n_angles) + 0.25) / n_angles
    w = (r[:, None] * np.exp(1j * t[None, :])).ravel()
    z = m.psi(w)
    dw = np.abs(w[:, None] - w[None, :])
    dz = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(dw, 1.0)
    np.fill_diagonal(dz, np.inf)
    if np.any(dz < tol * dw):
        raise ValueError("psi is not injective on the working annulus")


def psi_eval(m, w):
    """``psi(w)`` for ``|w| >= rho`` (scalar or array)."""
    w_arr = np.asarray(w, dtype=complex)
    if m.kind == "disk":
        return w_arr if w_arr.ndim else complex(w_arr)
    if np.any(np.abs(w_arr) < m.rho * (1 - 1e-12)):
        raise DomainError(f"|w| below rho={m.rho}")
    if m.kind == "laurent":
        xi = m.laurent_coeffs
        out = w_arr + xi[0]
        inv = 1.0 / w_arr
        powk = np.ones_like(w_arr)
        for x in xi[1:]:
            powk = powk * inv
            out = out + x * powk
    else:
        p, c = m.power_params
        # principal root of 1 + c w^-p is continuous for |w| > |c|^(1/p)
        out = w_arr * (1.0 + c * w_arr ** (-p)) ** (1.0 / p)
    return out if out.ndim else complex(out)


def phi_eval(m, z, tol=1e-12, max_iter=100, check_domain=True):
    """Inverse of ``psi`` on the exterior domain.

    Damped Newton iteration started at ``z - xi_0``.  Points that fail to
    converge are re-solved by continuation along the ray from a large multiple
    of ``z`` down to ``z``.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if m.kind == "disk":
        w = z_arr.copy()
    elif m.kind == "power_family":
        p, c = m.power_params
        with np.errstate(divide="ignore", invalid="ignore"):
            w = z_arr * (1.0 - c * z_arr ** (-p)) ** (1.0 / p)
        w, _ = _newton(m, z_arr, w, tol, 3)
    else:
        w0 = z_arr - m.laurent_coeffs[0]
        w, ok = _newton(m, z_arr, w0, tol, max_iter)
        if not np.all(ok):
            # a start on a symmetry line of psi never leaves it; nudge off the line
            bad = np.flatnonzero(~ok)
            w1, ok1 = _newton(m, z_arr[bad], w0[bad] * np.exp(0.1j) + 0.1j, tol, max_iter)
            w[bad] = np.where(ok1, w1, w[bad])
            ok[bad] = ok1
        if not np.all(ok):
            bad = np.flatnonzero(~ok)
            for i in bad:
                w[i] = _continuation(m, z_arr[i], tol, max_iter)
    if check_domain and m.kind != "disk":
        inside = np.abs(w) < m.rho * (1 - 1e-12)
        if np.any(inside):
            raise DomainError("point lies inside the working annulus image (|phi| < rho)")
    if np.ndim(z) == 0:
        return complex(w[0])
    return w.reshape(np.shape(z))


def _newton(m, z, w, tol, max_iter):
    w = w.astype(complex).copy()
    scale = np.maximum(1.0, np.abs(z))
    for _ in range(max_iter):
        with np.errstate(all="ignore"):
            f = _psi_unchecked(m, w) - z
            res = np.abs(f)
            ok = res <= tol * scale
            if np.all(ok):
                return w, ok
            step = f / m.dpsi(w)
            trial = w - step
            # damping: halve the step while the residual grows
            for _ in range(30):
                worse = np.abs(_psi_unchecked(m, trial) - z) > res
                worse &= ~ok
                if not np.any(worse):
                    break
                step = np.where(worse, 0.5 * step, step)
                trial = w - step
        w = np.where(ok, w, trial)
    with np.errstate(all="ignore"):
        ok = np.abs(_psi_unchecked(m, w) - z) <= tol * scale
    return w, ok


def _psi_unchecked(m, w):
    if m.kind == "laurent":
        out = w + m.laurent_coeffs[0]
        inv = 1.0 / w
        powk = np.ones_like(w)
        for x in m.laurent_coeffs[1:]:
            powk = powk * inv
            out = out + x * powk
        return out
    if m.kind == "power_family":
        p, c = m.power_params
        return w * (1.0 + c * w ** (-p)) ** (1.0 / p)
    return w


def _continuation(m, z, tol, max_iter):
    scales = np.geomspace(64.0, 1.0, 40)
    w = np.array([z * scales[0] - m.laurent_coeffs[0]])
    for s in scales:
        target = np.array([z * s])
        w, ok = _newton(m, target, w, tol, max_iter)
    if not ok[0]:
        raise ConvergenceError(f"phi did not converge at z={z}", last=complex(w[0]))
    return w[0]


def green_eval(m, z, boundary_tol=1e-10):
    """Green function of the exterior with pole at infinity: ``log|phi(z)|``.

    Points on the boundary (``|phi| = 1`` within ``boundary_tol``) return 0;
    interior points raise :class:`DomainError`.
    """
    w = np.atleast_1d(phi_eval(m, z, check_domain=False))
    mod = np.abs(w)
    if np.any(mod < 1.0 - boundary_tol):
        raise DomainError("green_eval requires points outside the region")
    g = np.where(mod <= 1.0 + boundary_tol, 0.0, np.log(mod))
    return float(g[0]) if np.ndim(z) == 0 else g.reshape(np.shape(z))


def equilibrium_moments(m, k_max, quad_points, include_zero=False):
    """Moments ``int phi(z)**k d omega(z)`` of the equilibrium measure.

    The equilibrium measure is the push-forward of ``d theta / 2 pi`` under
    ``psi``; the integral is evaluated on the z-side at the nodes
    ``psi(e^{i theta_j})`` and ``phi`` is recovered there.
    """
    if quad_points < 4 * k_max:
        raise ValueError("need quad_points >= 4 * k_max")
    theta, wts = periodic_trapezoid(quad_points)
    z = psi_eval(m, np.exp(1j * theta))
    phi = phi_eval(m, z, check_domain=False)
    ks = np.arange(0 if include_zero else 1, k_max + 1)
    return np.array([np.sum(wts * phi**k) for k in ks])


# -- Faber polynomials -------------------------------------------------------


class FaberPolynomial(MonicPolynomial):
    """Polynomial part of the Laurent expansion of ``phi(z)**n`` at infinity."""

    @property
    def coefficients(self):
        return self.full

    def __repr__(self):
        return f"FaberPolynomial(degree={self.degree})"


def _series_mul(a, b, order):
    return np.convolve(a, b)[: order + 1]


def _series_inv(a, order):
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, order + 1):
        s = np.dot(a[1 : min(k, a.size - 1) + 1], out[k - 1 :: -1][: min(k, a.size - 1)])
        out[k] = -s / a[0]
    return out


def _series_pow(a, n, order):
    result = np.zeros(order + 1, dtype=complex)
    result[0] = 1.0
    base = a[: order + 1].copy()
    while n:
        if n & 1:
            result = _series_mul(result, base, order)
        n >>= 1
        if n:
            base = _series_mul(base, base, order)
    return result


def reverted_series(m, order):
    """Coefficients of ``phi(z)/z`` as a power series in ``t = 1/z`` up to ``t**order``.

    With ``u = 1/w`` we have ``t = u / Phi(u)`` where ``Phi(u) = u psi(1/u)`` is a
    polynomial for Laurent maps.  Lagrange inversion gives
    ``[t^k] u(t) = (1/k) [u^(k-1)] Phi(u)**k``; then ``phi/z = t / u(t)``.
    """
    xi = m.xi
    Phi = np.concatenate([[1.0 + 0j], xi])  # 1 + xi0 u + xi1 u^2 + ...
    T = np.zeros(order + 2, dtype=complex)  # u(t) = sum T_k t^k
    power = np.array([1.0 + 0j])
    for k in range(1, order + 2):
        power = _series_mul(power, Phi, order + 1)
        if k - 1 < power.size:
            T[k] = power[k - 1] / k
    # u/t = T_1 + T_2 t + ...
    return _series_inv(T[1:], order)


def faber(m, n, max_degree=MAX_FABER_DEGREE):
    """The degree-``n`` Faber polynomial of the map.

    Laurent maps: series reversion of ``psi`` followed by the ``n``-th power of
    ``phi/z`` by series multiplication.  Power family: the exact binomial series
    of ``(1 - c z**(-p))**(n/p)``.
    """
    if n < 0 or n > max_degree:
        raise ValueError(f"degree must be in [0, {max_degree}]")
    if n == 0:
        return FaberPolynomial(np.zeros(0))
    if m.kind == "disk":
        return FaberPolynomial(np.zeros(n))
    full_desc = np.zeros(n + 1, dtype=complex)  # coefficient of z^(n-k) at index k
    if m.kind == "power_family":
        p, c = m.power_params
        for j in range(n // p + 1):
            full_desc[p * j] = binom(n / p, j) * (-c) ** j
    else:
        if n > m.truncation_order:
            raise TruncationError(
                f"degree {n} exceeds truncation_order {m.truncation_order}; the discarded tail is needed"
            )
        B = reverted_series(m, n)
        full_desc = _series_pow(B, n, n)
    full_desc[0] = 1.0
    return FaberPolynomial(full_desc[::-1][:-1])


def faber_recurrence(m, n_max, z):
    """Values ``F_0(z) .. F_{n_max}(z)`` from the generating-function recurrence.

    ``psi'(w)/(psi(w) - z) = sum_n F_n(z) w**(-n-1)`` gives, for a finite Laurent
    map, ``F_{n+1} = (z - xi_0) F_n - sum_{k=1}^n xi_k F_{n-k} - n xi_n``.  This
    evaluates Faber polynomials without forming monomial coefficients.
    """
    if m.kind != "laurent":
        raise ValueError("recurrence implemented for laurent maps")
    z = np.asarray(z, dtype=complex)
    xi = m.xi
    K = xi.size - 1
    F = np.zeros((n_max + 1,) + z.shape, dtype=complex)
    F[0] = 1.0
    for n in range(n_max):
        acc = (z - xi[0]) * F[n]
        for k in range(1, min(n, K) + 1):
            acc = acc - xi[k] * F[n - k]
        if 1 <= n <= K:
            acc = acc - n * xi[n]
        F[n + 1] = acc
    return F


def faber_decay(m, n_max, n_theta=256, method="coefficients"):
    """Boundary remainders ``max_theta |F_n(psi(e^{i theta})) - e^{i n theta}|``.

    Returns ``(errors, floors)``: ``floors[n]`` bounds the rounding error of the
    evaluation (``64 eps`` times the absolute-value polynomial for the
    coefficient route), below which a remainder is not resolved.
    """
    theta, _ = periodic_trapezoid(n_theta)
    w = np.exp(1j * theta)
    z = psi_eval(m, w)
    errors = np.zeros(n_max + 1)
    floors = np.zeros(n_max + 1)
    eps = np.finfo(float).eps
    if method == "recurrence":
        F = faber_recurrence(m, n_max, z)
    for n in range(n_max + 1):
        if method == "recurrence":
            vals = F[n]
            floors[n] = 64 * eps * (n + 1) * np.max(np.abs(vals) + 1.0)
        else:
            Fn = faber(m, n, max_degree=max(n_max, MAX_FABER_DEGREE))
            vals = Fn(z)
            floors[n] = 64 * eps * np.max(Fn.abs_bound(z))
        errors[n] = np.max(np.abs(vals - w**n))
    return errors, floors


def fit_geometric_rate(ns, errors, floors=None, margin=10.0):
    """Least-squares geometric rate ``exp(slope)`` of ``log(error)`` against ``n``.

    Degrees whose error does not exceed ``margin * floor`` are dropped.
    Returns ``(rate, used_ns)``.
    """
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > 0
    if floors is not None:
        keep &= errors > margin * np.asarray(floors)
    if np.count_nonzero(keep) < 3:
        return float("nan"), ns[keep]
    slope = np.polyfit(ns[keep], np.log(errors[keep]), 1)[0]
    return float(np.exp(slope)), ns[keep]


def laurent_coefficient_oracle(m, power, k, radius=2.0, n_points=512):
    """Coefficient of ``z**k`` in ``phi(z)**power`` by a contour integral.

    ``(1/2 pi i) \\oint phi(z)**power z**(-k-1) dz`` taken over ``psi(|w| = radius)``,
    i.e. ``mean_j w_j**(power+1) psi(w_j)**(-k-1) psi'(w_j)``.  Independent of the
    series arithmetic in :func:`faber`.
    """
    theta, wts = periodic_trapezoid(n_points)
    w = radius * np.exp(1j * theta)
    z = psi_eval(m, w)
    return complex(np.sum(wts * w ** (power + 1) * z ** (-k - 1) * m.dpsi(w)))


def faber_binomial_power_family(p, c, n):
    """Exact Faber coefficients (descending) for ``phi**p = z**p - c`` when ``p | n``."""
    m = n // p
    out = np.zeros(n + 1, dtype=complex)
    for j in range(m + 1):
        out[p * j] = comb(m, j) * (-c) ** j
    return out
