"""Quadrature rules on the circle and on intervals."""

import numpy as np

TWO_PI = 2.0 * np.pi


def periodic_trapezoid(n):
    """Nodes ``2*pi*j/n`` and weights ``1/n`` (normalized to d(theta)/2pi)."""
    theta = TWO_PI * np.arange(n) / n
    return theta, np.full(n, 1.0 / n)


def gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _panel_edges(breakpoints):
    pts = sorted({float(np.mod(b, TWO_PI)) for b in breakpoints})
    if not pts:
        return None
    return np.array(pts + [pts[0] + TWO_PI])


def angular_rule(n, breakpoints=()):
    """Rule for d(theta)/2pi on one period.

    Without breakpoints this is the periodic trapezoid rule (spectral for smooth
    periodic integrands).  With breakpoints the period is cut into panels at the
    given angles and each panel gets Gauss-Legendre nodes, roughly in proportion
    to its length.  Returned angles are reduced mod 2pi.
    """
    edges = _panel_edges(breakpoints)
    if edges is None:
        return periodic_trapezoid(n)
    lengths = np.diff(edges)
    counts = np.maximum(8, np.round(n * lengths / TWO_PI).astype(int))
    thetas, weights = [], []
    for a, b, m in zip(edges[:-1], edges[1:], counts):
        t, w = gauss_legendre(int(m), a, b)
        thetas.append(t)
        weights.append(w / TWO_PI)
    theta = np.mod(np.concatenate(thetas), TWO_PI)
    return theta, np.concatenate(weights)


def circle_mean(f, n=1024, breakpoints=()):
    """Approximate the mean of ``f(theta)`` over one period."""
    theta, w = angular_rule(n, breakpoints)
    return np.sum(w * f(theta))
