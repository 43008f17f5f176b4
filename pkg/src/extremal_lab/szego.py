"""Geometric means, exterior Szego functions, and predicted norm limits."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conformal import phi_eval, psi_eval
from .errors import DomainError, ExtremalLabError
from .quadrature import angular_rule, periodic_trapezoid

LOG_FLOOR = -50.0


class NonSzegoError(ExtremalLabError, ValueError):
    """The log-integral of a density reached the floor: no finite geometric mean."""


def _clamped_log(values):
    with np.errstate(divide="ignore"):
        out = np.log(np.asarray(values, dtype=float))
    return np.maximum(out, LOG_FLOOR)


def log_mean(density, n=4096, breakpoints=()):
    """``int log density d theta / 2 pi`` with the log clamped below at ``LOG_FLOOR``."""
    theta, w = angular_rule(n, breakpoints)
    return float(np.sum(w * _clamped_log(density(theta))))


def geometric_mean(density, n=4096, breakpoints=()):
    """``exp(int log density d theta / 2 pi)``.

    Raises :class:`NonSzegoError` when the clamped mean sits at the floor.
    """
    lm = log_mean(density, n, breakpoints)
    if lm <= LOG_FLOOR + 1e-9:
        raise NonSzegoError("log-integral hit the floor; density is not of Szego type")
    return float(np.exp(lm))


@dataclass(frozen=True, eq=False)
class SzegoFunction:
    """Exterior Szego function of a weight ``gamma'`` on the unit circle.

    ``S(z; q) = exp(-(1 / 2 q pi) int log gamma'(t) (e^{it} + z)/(e^{it} - z) dt)``
    is analytic and zero-free in ``|z| > 1`` with ``S(inf) = G**(1/q) > 0`` and
    ``|S(e^{it})|**q = gamma'(t)`` at continuity points.
    """

    q: float
    boundary_log_density: Callable
    n_quad: int = 2048
    breakpoints: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_density(cls, density, q, **kwargs):
        return cls(q, lambda t: _clamped_log(density(t)), **kwargs)

    def _nodes(self):
        if "nodes" not in self._cache:
            theta, w = angular_rule(self.n_quad, self.breakpoints)
            logs = np.maximum(np.asarray(self.boundary_log_density(theta), dtype=float), LOG_FLOOR)
            self._cache["nodes"] = (theta, w, logs)
        return self._cache["nodes"]

    @property
    def floored(self):
        return bool(np.any(self._nodes()[2] <= LOG_FLOOR))

    def at_infinity(self):
        _, w, logs = self._nodes()
        return float(np.exp(np.sum(w * logs) / self.q))

    def __call__(self, z):
        return szego_eval(self, z)


def szego_eval(S, z, min_gap=1e-8):
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z_arr) <= 1.0 + min_gap):
        raise DomainError("Szego function is evaluated only for |z| > 1 + 1e-8")
    theta, w, logs = S._nodes()
    e = np.exp(1j * theta)
    kernel = (e[None, :] + z_arr[:, None]) / (e[None, :] - z_arr[:, None])
    # the kernel averages to -1 over the circle, so subtracting the log density at
    # arg z removes the near-singular part when z approaches the circle
    base = np.maximum(np.asarray(S.boundary_log_density(np.angle(z_arr)), dtype=float), LOG_FLOOR)
    integral = np.sum(kernel * w[None, :] * (logs[None, :] - base[:, None]), axis=1) - base
    out = np.exp(-integral / S.q)
    return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


def boundary_weight(mu):
    """``theta -> h(e^{i theta}) nu'(theta)`` and its breakpoints."""
    h, nu = mu.h, mu.angular

    def f(theta):
        return h(np.exp(1j * np.asarray(theta))) * nu.density(theta)

    return f, tuple(nu.breakpoints) + tuple(h.breakpoints)


@dataclass(frozen=True)
class Prediction:
    value: float
    szego: bool
    geometric_mean: float
    atom_factor: float


def predicted_limit(mu, q, n_quad=4096):
    """Predicted limit of ``||P_n||_q**q / c_{qn}(tau)``.

    ``G(h nu') * prod_j |phi(z_j)|**q`` over exterior atoms.  Boundary atoms,
    ``sigma1``, ``sigma2`` and the singular part of ``nu`` do not enter.
    Returns a :class:`Prediction`; for a non-Szego ``nu`` the value is 0 and
    ``szego`` is False.
    """
    f, bps = boundary_weight(mu)
    atom_factor = float(np.prod([abs(phi_eval(mu.map, z)) ** q for z, _ in mu.exterior_atoms]))
    try:
        g = geometric_mean(f, n=n_quad, breakpoints=bps)
    except NonSzegoError:
        return Prediction(0.0, False, 0.0, atom_factor)
    return Prediction(g * atom_factor, True, g, atom_factor)


def psiint_check(mp, x, r, q, n_quad=2048):
    """Both sides of ``mean_theta log|psi(r e^{i theta}) - x|**q = q log|phi(x)|``.

    Valid for ``x`` outside the region and ``rho <= r <= 1``.  When ``x`` lies on
    the boundary and ``r = 1`` the integrand has a log singularity; the rule is
    then shifted by half a step so no node hits it.
    """
    x = complex(x)
    if mp.kind != "disk" and not (mp.rho - 1e-12 <= r <= 1.0):
        raise DomainError("r must lie in [rho, 1]")
    px = phi_eval(mp, x, check_domain=False)
    if abs(px) < 1.0 - 1e-10:
        raise DomainError("x lies inside the region")
    theta, w = periodic_trapezoid(n_quad)
    theta = theta + np.pi / n_quad
    vals = np.abs(psi_eval(mp, r * np.exp(1j * theta)) - x)
    lhs = float(np.sum(w * q * np.log(vals)))
    rhs = float(q * np.log(abs(px)))
    return lhs, rhs
