"""Monic polynomials in the monomial basis and simultaneous root refinement."""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True, eq=False)
class MonicPolynomial:
    """``z**n + coeffs[n-1] z**(n-1) + ... + coeffs[0]``.

    ``coeffs`` holds the lower-order coefficients in ascending order; the
    leading coefficient is implicit and exactly 1.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).ravel())

    @classmethod
    def from_full(cls, full):
        """Build from ascending coefficients ``c0..cn``, normalizing by ``cn``."""
        full = np.asarray(full, dtype=complex).ravel()
        if full[-1] == 0:
            raise ValueError("leading coefficient is zero")
        return cls(full[:-1] / full[-1])

    @classmethod
    def monomial(cls, n):
        return cls(np.zeros(n, dtype=complex))

    @property
    def degree(self):
        return self.coeffs.size

    @property
    def full(self):
        return np.append(self.coeffs, 1.0 + 0j)

    def __call__(self, z):
        return horner(self.full, z)

    def derivative_at(self, z):
        return horner_with_derivative(self.full, z)[1]

    def abs_bound(self, z):
        """``sum |c_k| |z|^k``, the scale of rounding error in Horner evaluation."""
        return np.real(horner(np.abs(self.full), np.abs(np.asarray(z))))

    def roots(self, **kwargs):
        return poly_roots(self, **kwargs)

    def __repr__(self):
        return f"MonicPolynomial(degree={self.degree})"


def horner(full, z):
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, full[-1], dtype=complex)
    for c in full[-2::-1]:
        out = out * z + c
    return out


def horner_with_derivative(full, z):
    z = np.asarray(z, dtype=complex)
    p = np.full(z.shape, full[-1], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for c in full[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _residual_ok(poly, z, tol):
    resid = np.abs(poly(z))
    scale = horner(np.abs(poly.full), np.maximum(1.0, np.abs(z)))
    return resid <= tol * scale


def poly_roots(poly, tol=1e-9, max_iter=500, seed=0):
    """All roots of a monic polynomial by Aberth-Ehrlich simultaneous iteration.

    Starting guesses sit on a circle of radius ``(1 + |a0|)**(1/n)`` with a small
    deterministic angular jitter.  A root is accepted when
    ``|P(r)| <= tol * sum_k |a_k| max(1, |r|)**k``; inside the closed unit disk
    this is the usual residual relative to the coefficient size, and outside it
    the bound grows like the rounding error of evaluating ``P`` there.
    """
    full = poly.full
    n = poly.degree
    if n < 1:
        raise ValueError("degree must be at least 1")
    if n == 1:
        return np.array([-full[0]])

    rng = np.random.default_rng(seed)
    radius = (1.0 + abs(full[0])) ** (1.0 / n)
    angles = 2 * np.pi * np.arange(n) / n + 0.5 / n + 0.1 * rng.random(n) / n
    z = radius * np.exp(1j * angles)

    for _ in range(max_iter):
        p, dp = horner_with_derivative(full, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = np.sum(1.0 / diff, axis=1) - 1.0
            step = ratio / (1.0 - ratio * s)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        small = np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(z))
        if np.all(small | (np.abs(p) == 0)):
            break

    # one Newton polish per root; keep it only where it lowers the residual
    p, dp = horner_with_derivative(full, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = z - p / dp
    better = np.isfinite(cand) & (np.abs(horner(full, cand)) < np.abs(p))
    z = np.where(better, cand, z)

    ok = _residual_ok(poly, z, tol)
    if not np.all(ok):
        raise ConvergenceError(
            f"root refinement left {np.count_nonzero(~ok)} of {n} roots above tolerance", last=z
        )
    return z


def deflate(poly, root):
    """Divide out ``(z - root)`` by synthetic division.

    Roots outside the unit disk are removed with the backward recurrence (from
    the constant term up), which is the stable direction when ``|root|`` exceeds
    the other roots; small roots use ordinary forward Horner deflation.
    """
    a = poly.full
    n = poly.degree
    b = np.zeros(n, dtype=complex)
    if abs(root) > 1.0:
        prev = 0.0 + 0j
        for k in range(n):
            prev = (prev - a[k]) / root
            b[k] = prev
        b[-1] = 1.0
    else:
        b[n - 1] = 1.0
        for k in range(n - 1, 0, -1):
            b[k - 1] = a[k] + root * b[k]
    return MonicPolynomial(b[:-1])
