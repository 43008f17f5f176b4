"""Brute-force reference solvers for tiny instances.

Dense grid search over the real and imaginary parts of the free
coefficients, followed by repeated zooming around the best candidates.  These
share no code with the IRLS solver and serve as independent oracles for
degree <= 2 problems on a handful of nodes.
"""

import itertools

import numpy as np


def _grid_search(objective, dim, center, width, points=15, levels=40, keep=4, shrink=0.35):
    """Minimize ``objective`` (vectorized over rows of real parameters) by zooming grids."""
    axis = np.linspace(-1.0, 1.0, points)
    offsets = np.array(list(itertools.product(axis, repeat=dim)))
    cands = offsets * width + center
    vals = objective(cands)
    order = np.argsort(vals)[:keep]
    seeds = [(cands[i], vals[i]) for i in order]
    best_x, best_v = seeds[0]
    for x0, _ in seeds:
        w = width * 2.0 / (points - 1)
        x = x0
        v = objective(x[None, :])[0]
        for _ in range(levels):
            grid = offsets * w + x
            vals = objective(grid)
            i = int(np.argmin(vals))
            if vals[i] < v:
                x, v = grid[i], vals[i]
            w *= shrink
        if v < best_v:
            best_x, best_v = x, v
    return best_x, float(best_v)


def _to_complex(params):
    return params[:, 0::2] + 1j * params[:, 1::2]


def brute_force_monic(nodes, weights, n, q, points=15):
    """Minimum of ``sum w |P(x)|**q`` over monic ``P`` of degree ``n <= 2``.

    Returns ``(lower_coefficients, objective)``.
    """
    nodes = np.asarray(nodes, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    if n == 0:
        return np.zeros(0), float(np.sum(weights))
    V = nodes[None, :] ** np.arange(n)[:, None]  # (n, N)
    lead = nodes**n

    def objective(params):
        c = _to_complex(params)
        vals = lead[None, :] + c @ V
        return np.sum(weights[None, :] * np.abs(vals) ** q, axis=1)

    R = max(1.0, float(np.max(np.abs(nodes))))
    width = 2.0 * (2.0 * R) ** n
    x, v = _grid_search(objective, 2 * n, np.zeros(2 * n), width, points=points)
    return x[0::2] + 1j * x[1::2], v


def brute_force_christoffel(nodes, weights, z, n, q, points=15):
    """Minimum of ``sum w |Q(x)|**q`` over ``Q(z) = 1``, ``deg Q <= n <= 2``."""
    nodes = np.asarray(nodes, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    V = (nodes - z)[None, :] * nodes[None, :] ** np.arange(n)[:, None]

    def objective(params):
        c = _to_complex(params)
        vals = 1.0 + c @ V
        return np.sum(weights[None, :] * np.abs(vals) ** q, axis=1)

    R = max(1.0, float(np.max(np.abs(nodes))))
    dist = max(float(np.min(np.abs(nodes - z)[np.abs(nodes - z) > 0], initial=1.0)), 0.1)
    width = 4.0 * R**n / dist
    x, v = _grid_search(objective, 2 * n, np.zeros(2 * n), width, points=points)
    return x[0::2] + 1j * x[1::2], v


def oracle_corpus(seed=0, count=12):
    """Deterministic small instances ``(nodes, weights, n, q, z)``.

    Node counts 3..12, degrees 1..2, exponents in {1, 1.5, 2, 3, 4}; ``z`` is a
    point for the Christoffel variant (sometimes a node, sometimes not).
    """
    rng = np.random.default_rng(seed)
    qs = (1.0, 1.5, 2.0, 3.0, 4.0)
    out = []
    for k in range(count):
        N = int(rng.integers(3, 13))
        r = np.sqrt(rng.random(N))
        nodes = r * np.exp(2j * np.pi * rng.random(N))
        weights = rng.random(N) + 0.1
        n = 1 + k % 2
        q = qs[k % len(qs)]
        z = nodes[0] if k % 3 == 0 else 0.3 * np.exp(2j * np.pi * rng.random())
        out.append((nodes, weights, n, q, complex(z)))
    return out
