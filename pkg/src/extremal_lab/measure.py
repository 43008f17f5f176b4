"""Region measures, their quadrature discretizations, and radial moments.

A region measure is

    mu = psi_*( h * (nu x tau) ) + sigma1 + sigma2 + sum alpha_j delta_{z_j} + sum beta_j delta_{zeta_j}

where ``nu`` lives on the unit circle (density ``nu'`` with respect to
``d theta / 2 pi`` plus finitely many atoms), ``tau`` lives on ``[rho, 1]``, and
``h`` is a positive weight on the closed annulus.
"""

from dataclasses import dataclass, field
from typing import Callable
import warnings

import numpy as np
from scipy import integrate
from scipy.special import logsumexp, roots_jacobi

from .conformal import ExteriorMap, phi_eval, psi_eval
from .errors import ConditioningWarning, DomainError, ResolutionError
from .quadrature import TWO_PI, angular_rule, gauss_legendre

MASS_RTOL = 1e-10
PROVENANCE = ("annulus-quadrature", "atom", "sigma1", "sigma2")


# -- radial part tau --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """``tau`` on ``[lo, 1]``: ``density(r) dr`` plus atoms ``(r_j, mass_j)``.

    ``rule(n)`` may return Gauss nodes/weights already folded with the density
    (e.g. Gauss-Jacobi for power densities); otherwise Gauss-Legendre times the
    density is used.  ``density_mass`` is the closed-form mass of the density
    part when known.
    """

    density: Callable | None = None
    lo: float = 0.0
    atoms: tuple = ()
    name: str = "custom"
    params: dict = field(default_factory=dict)
    rule: Callable | None = None
    density_mass: float | None = None

    def __post_init__(self):
        atoms = tuple((float(r), float(m)) for r, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not 0.0 <= self.lo < 1.0:
            raise ValueError("radial support must be [lo, 1] with 0 <= lo < 1")
        for r, m in atoms:
            if not (self.lo - 1e-15 <= r <= 1.0) and self.density is not None:
                raise ValueError(f"atom at r={r} outside [{self.lo}, 1]")
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"atom at r={r} outside [0, 1]")
            if m <= 0:
                raise ValueError("atom masses must be positive")
        if self.total_mass() <= 0:
            raise ValueError("radial measure has zero mass")

    @property
    def min_radius(self):
        pts = [r for r, _ in self.atoms]
        if self.density is not None:
            pts.append(self.lo)
        return min(pts)

    def atom_mass(self):
        return sum(m for _, m in self.atoms)

    def total_mass(self):
        return radial_moment(self, 0.0)

    def nodes(self, n_r):
        """Quadrature for the density part: ``(r, weights)``."""
        if self.density is None:
            return np.zeros(0), np.zeros(0)
        if self.rule is not None:
            return self.rule(n_r)
        r, w = gauss_legendre(n_r, self.lo, 1.0)
        return r, w * self.density(r)

    def to_dict(self):
        return {"family": self.name, **self.params}

    # -- named families --

    @classmethod
    def delta1(cls):
        return cls(atoms=((1.0, 1.0),), name="delta1")

    @classmethod
    def dirac(cls, r0, mass=1.0):
        return cls(atoms=((r0, mass),), name="dirac", params={"r0": r0, "mass": mass})

    @classmethod
    def power(cls, a=1.0):
        """``(a+1) r**a dr`` on ``[0, 1]``; ``a=1`` is the area measure ``2r dr``."""
        a = float(a)
        if a <= -1:
            raise ValueError("power density needs a > -1")

        def rule(n):
            x, w = roots_jacobi(n, 0.0, a)  # weight (1+x)^a on [-1,1]
            r = 0.5 * (x + 1.0)
            return r, w * (a + 1.0) / 2.0 ** (a + 1.0)

        return cls(
            density=lambda r: (a + 1.0) * r**a,
            lo=0.0,
            name="area" if a == 1.0 else "power",
            params={} if a == 1.0 else {"a": a},
            rule=rule,
            density_mass=1.0,
        )

    @classmethod
    def area(cls):
        return cls.power(1.0)

    @classmethod
    def uniform(cls, lo=0.0):
        lo = float(lo)
        return cls(
            density=lambda r: np.full(np.shape(r), 1.0 / (1.0 - lo)),
            lo=lo,
            name="uniform",
            params={"lo": lo},
            density_mass=1.0,
        )

    @classmethod
    def one_minus_r(cls, k=1.0):
        """``(k+1)(1-r)**k dr`` on ``[0,1]``: vanishes at 1 yet ``1`` is in the support."""
        k = float(k)

        def rule(n):
            x, w = roots_jacobi(n, k, 0.0)  # weight (1-x)^k
            return 0.5 * (x + 1.0), w * (k + 1.0) / 2.0 ** (k + 1.0)

        return cls(
            density=lambda r: (k + 1.0) * (1.0 - r) ** k,
            name="one_minus_r",
            params={"k": k},
            rule=rule,
            density_mass=1.0,
        )

    @classmethod
    def atoms_at(cls, radii, masses):
        return cls(
            atoms=tuple(zip(radii, masses)),
            name="atoms",
            params={"radii": list(map(float, radii)), "masses": list(map(float, masses))},
        )

    @classmethod
    def sparse_atoms(cls, n_terms=60):
        """``(6/pi^2) sum_j j**-2 delta_{1 - 2**-j}``.

        Terms beyond ``n_terms`` are merged into one atom at ``r = 1``.  Their
        true locations differ from 1 by less than ``2**-n_terms``, so for the
        default 60 terms every moment ``c_t`` with ``t <= 2**30`` is unchanged
        to double precision.
        """
        j = np.arange(1, n_terms + 1, dtype=float)
        c = 6.0 / np.pi**2
        masses = c / j**2
        tail = 1.0 - masses.sum()  # c * sum_{j > n_terms} j^-2
        radii = 1.0 - 2.0 ** (-j)
        atoms = list(zip(radii, masses))
        if tail > 0:
            atoms.append((1.0, tail))
        return cls(atoms=tuple(atoms), name="sparse_atoms", params={"n_terms": n_terms})


RADIAL_FAMILIES = {
    "delta1": lambda: RadialMeasure.delta1(),
    "dirac": lambda r0, mass=1.0: RadialMeasure.dirac(r0, mass),
    "area": lambda: RadialMeasure.area(),
    "power": lambda a=1.0: RadialMeasure.power(a),
    "uniform": lambda lo=0.0: RadialMeasure.uniform(lo),
    "one_minus_r": lambda k=1.0: RadialMeasure.one_minus_r(k),
    "atoms": lambda radii, masses: RadialMeasure.atoms_at(radii, masses),
    "sparse_atoms": lambda n_terms=60: RadialMeasure.sparse_atoms(n_terms),
}


def radial_moment(tau, t):
    """``c_t(tau) = int r**t d tau(r)`` (adaptive quadrature plus exact atom sums)."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    total = sum(m * r**t for r, m in tau.atoms) if tau.atoms else 0.0
    if tau.density is None:
        return float(total)
    if t == 0 and tau.density_mass is not None:
        return float(total + tau.density_mass)
    lo = tau.lo

    def f(r):
        return r**t * tau.density(r)

    # r**t lives in a layer of width ~1/t at r = 1; integrate that layer separately
    split = max(lo, 1.0 - 40.0 / t) if t > 40 else lo
    kw = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    val = integrate.quad(f, split, 1.0, **kw)[0]
    if split > lo:
        val += integrate.quad(f, lo, split, **kw)[0]
    return float(total + val)


def log_radial_moment(tau, t):
    """``log c_t(tau)``, exact in log space for purely atomic ``tau`` (no underflow)."""
    if tau.density is None:
        r = np.array([a for a, _ in tau.atoms])
        m = np.array([b for _, b in tau.atoms])
        with np.errstate(divide="ignore"):
            return float(logsumexp(np.log(m) + float(t) * np.log(r)))
    return float(np.log(radial_moment(tau, t)))


# -- angular part nu --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AngularMeasure:
    """``nu = nu'(theta) d theta/2pi + sum m_j delta_{theta_j}``."""

    density: Callable = None
    breakpoints: tuple = ()
    atoms: tuple = ()
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.density is None:
            object.__setattr__(self, "density", lambda t: np.ones(np.shape(t)))
        atoms = tuple((float(t) % TWO_PI, float(m)) for t, m in self.atoms)
        if any(m <= 0 for _, m in atoms):
            raise ValueError("angular atom masses must be positive")
        object.__setattr__(self, "atoms", atoms)

    def log_mean(self, n=4096):
        from .szego import log_mean

        return log_mean(self.density, n=n, breakpoints=self.breakpoints)

    def is_szego(self, n=4096):
        from .szego import LOG_FLOOR

        return self.log_mean(n) > LOG_FLOOR

    def to_dict(self):
        d = {"family": self.name, **self.params}
        if self.atoms:
            d["atoms"] = [[t, m] for t, m in self.atoms]
        return d

    @classmethod
    def uniform(cls, atoms=()):
        return cls(name="uniform", atoms=atoms)

    @classmethod
    def bernstein(cls, a=0.5, atoms=()):
        """``|1 - a e^{i theta}|**2``; geometric mean 1 when ``|a| < 1``."""
        a = complex(a)
        return cls(
            density=lambda t: np.abs(1.0 - a * np.exp(1j * np.asarray(t))) ** 2,
            name="bernstein",
            params={"a": [a.real, a.imag]} if a.imag else {"a": a.real},
            atoms=atoms,
        )

    @classmethod
    def cosine(cls, b=1.0, atoms=()):
        """``1 + b cos(theta)`` with ``|b| <= 1``."""
        if abs(b) > 1:
            raise ValueError("need |b| <= 1 for a non-negative density")
        return cls(
            density=lambda t: 1.0 + b * np.cos(t), name="cosine", params={"b": b}, atoms=atoms
        )

    @classmethod
    def two_level(cls, low=1.0, high=2.0, start=np.pi / 2, stop=3 * np.pi / 2, atoms=()):
        """``high`` on the arc ``(start, stop]``, ``low`` elsewhere."""
        return cls(
            density=_two_level(low, high, start, stop),
            breakpoints=(start, stop),
            name="two_level",
            params={"low": low, "high": high, "start": start, "stop": stop},
            atoms=atoms,
        )


def _arc_indicator(t, start, stop):
    t = np.mod(t, TWO_PI)
    start, stop = start % TWO_PI, stop % TWO_PI
    if start <= stop:
        return (t > start) & (t <= stop)
    return (t > start) | (t <= stop)


def _two_level(low, high, start, stop):
    def f(t):
        return np.where(_arc_indicator(np.asarray(t, dtype=float), start, stop), high, low)

    return f


ANGULAR_FAMILIES = {
    "uniform": AngularMeasure.uniform,
    "bernstein": AngularMeasure.bernstein,
    "cosine": AngularMeasure.cosine,
    "two_level": AngularMeasure.two_level,
}


# -- the weight h -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Weight:
    """Positive weight ``h(w)`` on the closed annulus, with angular breakpoints."""

    func: Callable = None
    breakpoints: tuple = ()
    constant: float | None = 1.0
    name: str = "one"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.func is None:
            c = self.constant
            object.__setattr__(self, "func", lambda w: np.full(np.shape(w), c, dtype=float))

    def __call__(self, w):
        return self.func(np.asarray(w))

    def bounds(self, rho, n=64):
        """Sampled ``(min, max)`` of ``h`` on the annulus ``rho <= |w| <= 1``."""
        r = np.linspace(rho, 1.0, 9)
        t = TWO_PI * (np.arange(n) + 0.5) / n
        vals = self(r[:, None] * np.exp(1j * t[None, :]))
        return float(vals.min()), float(vals.max())

    def to_dict(self):
        return {"family": self.name, **self.params}

    @classmethod
    def one(cls):
        return cls()

    @classmethod
    def halfplane(cls, right=1.0, left=2.0):
        """``right`` on ``Re w > 0`` and ``left`` on ``Re w <= 0``."""

        def f(w):
            return np.where(np.real(w) > 0, right, left).astype(float)

        return cls(
            func=f,
            breakpoints=(np.pi / 2, 3 * np.pi / 2),
            constant=None,
            name="halfplane",
            params={"right": right, "left": left},
        )

    @classmethod
    def radial_linear(cls, a=0.5):
        """``1 + a |w|**2``: depends on the radius, constant on circles."""

        def f(w):
            return 1.0 + a * np.abs(w) ** 2

        return cls(func=f, constant=None, name="radial_linear", params={"a": a})


WEIGHT_FAMILIES = {
    "one": Weight.one,
    "halfplane": Weight.halfplane,
    "radial_linear": Weight.radial_linear,
}


# -- region measure and discretization ----------------------------------------


@dataclass(frozen=True, eq=False)
class RegionMeasure:
    map: ExteriorMap
    radial: RadialMeasure
    angular: AngularMeasure = field(default_factory=AngularMeasure.uniform)
    h: Weight = field(default_factory=Weight.one)
    sigma1: tuple = ()  # (z, weight), z strictly inside the region
    sigma2: tuple = ()  # (w, weight), rho <= |w| <= r_max < 1 in the w-plane
    exterior_atoms: tuple = ()  # (z, alpha)
    boundary_atoms: tuple = ()  # (zeta, beta)
    r_max: float = 0.99

    def __post_init__(self):
        norm = lambda pts: tuple((complex(z), float(m)) for z, m in pts)  # noqa: E731
        for name in ("sigma1", "sigma2", "exterior_atoms", "boundary_atoms"):
            object.__setattr__(self, name, norm(getattr(self, name)))
        self.validate()

    @property
    def m(self):
        return len(self.exterior_atoms)

    @property
    def ell(self):
        return len(self.boundary_atoms)

    def validate(self):
        mp = self.map
        if not mp.has_annulus:
            raise ValueError("region measures need a map with a working annulus")
        if mp.kind != "disk" and self.radial.min_radius < mp.rho - 1e-12:
            raise DomainError(f"tau charges radii below rho={mp.rho}")
        lo, hi = self.h.bounds(mp.rho)
        if not lo > 0 or not np.isfinite(hi):
            raise ValueError("h must be bounded between positive constants")
        for pts, what in ((self.sigma1, "sigma1"), (self.sigma2, "sigma2"),
                          (self.exterior_atoms, "exterior atom"), (self.boundary_atoms, "boundary atom")):
            if any(m <= 0 for _, m in pts):
                raise ValueError(f"{what} masses must be positive")
        for w, _ in self.sigma2:
            if not (mp.rho - 1e-12 <= abs(w) <= self.r_max < 1.0):
                raise DomainError(f"sigma2 node w={w} must satisfy rho <= |w| <= r_max < 1")
        for z, _ in self.exterior_atoms:
            if abs(phi_eval(mp, z)) <= 1.0 + 1e-6:
                raise DomainError(f"exterior atom {z} is not outside the closed region")
        for z, _ in self.boundary_atoms:
            if abs(abs(phi_eval(mp, z)) - 1.0) > 1e-8:
                raise DomainError(f"boundary atom {z} is not on the boundary")
        for z, _ in self.sigma1:
            try:
                inside = abs(phi_eval(mp, z)) < 1.0 - 1e-12
            except DomainError:
                inside = True
            if not inside:
                raise DomainError(f"sigma1 node {z} is not inside the region")

    def total_mass(self):
        """Mass of ``mu`` by nested adaptive quadrature, independent of :func:`discretize`."""
        return _independent_mass(self)

    def to_dict(self):
        pairs = lambda pts: [[z.real, z.imag, m] for z, m in pts]  # noqa: E731
        return {
            "radial": self.radial.to_dict(),
            "angular": self.angular.to_dict(),
            "h": self.h.to_dict(),
            "sigma1": pairs(self.sigma1),
            "sigma2": pairs(self.sigma2),
            "exterior_atoms": pairs(self.exterior_atoms),
            "boundary_atoms": pairs(self.boundary_atoms),
        }

    def with_(self, **changes):
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return RegionMeasure(**kw)

    def boundary_measure(self, extra=None, exponent=None):
        """``psi_*(h nu)`` restricted to the unit circle, optionally times ``|extra(z)|**exponent``."""
        return _BoundaryMeasure(self, extra, exponent)


@dataclass(frozen=True, eq=False)
class _BoundaryMeasure:
    base: RegionMeasure
    extra: Callable | None = None
    exponent: float | None = None

    def discretize(self, n_theta=512):
        mu = self.base
        theta, wt = angular_rule(n_theta, mu.angular.breakpoints + mu.h.breakpoints)
        w = np.exp(1j * theta)
        wt = wt * mu.angular.density(theta) * mu.h(w)
        if mu.angular.atoms:
            ta = np.array([t for t, _ in mu.angular.atoms])
            wa = np.exp(1j * ta)
            ma = np.array([m for _, m in mu.angular.atoms]) * mu.h(wa)
            w = np.concatenate([w, wa])
            wt = np.concatenate([wt, ma])
        z = psi_eval(mu.map, w)
        if self.extra is not None:
            wt = wt * np.abs(self.extra(z)) ** self.exponent
        return Discretization(
            nodes=z,
            weights=wt,
            provenance=np.full(z.size, "annulus-quadrature"),
            preimage=w,
        )


@dataclass(frozen=True, eq=False)
class Discretization:
    nodes: np.ndarray
    weights: np.ndarray
    provenance: np.ndarray
    preimage: np.ndarray = None
    exterior_idx: np.ndarray = None
    boundary_idx: np.ndarray = None
    reference_mass: float | None = None

    def __post_init__(self):
        n = np.asarray(self.nodes).size
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=complex).ravel())
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).ravel())
        object.__setattr__(self, "provenance", np.asarray(self.provenance).ravel())
        if self.preimage is None:
            object.__setattr__(self, "preimage", np.full(n, np.nan + 0j))
        for name in ("exterior_idx", "boundary_idx"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.zeros(0, dtype=int))
        if self.weights.size != n or self.provenance.size != n:
            raise ValueError("nodes, weights and provenance must have equal length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")

    @property
    def size(self):
        return self.nodes.size

    @property
    def mass(self):
        return float(np.sum(self.weights))

    def subset(self, mask):
        mask = np.asarray(mask, dtype=bool)
        remap = np.cumsum(mask) - 1
        keep = lambda idx: remap[idx[mask[idx]]] if idx.size else idx  # noqa: E731
        return Discretization(
            self.nodes[mask],
            self.weights[mask],
            self.provenance[mask],
            self.preimage[mask],
            keep(self.exterior_idx),
            keep(self.boundary_idx),
        )

    def with_weights(self, weights):
        return Discretization(
            self.nodes, weights, self.provenance, self.preimage, self.exterior_idx, self.boundary_idx
        )

    def merged(self, other):
        off = self.size
        return Discretization(
            np.concatenate([self.nodes, other.nodes]),
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.provenance, other.provenance]),
            np.concatenate([self.preimage, other.preimage]),
            np.concatenate([self.exterior_idx, other.exterior_idx + off]),
            np.concatenate([self.boundary_idx, other.boundary_idx + off]),
        )


def point_measure(points, masses=None):
    """Discretization consisting only of atoms."""
    z = np.asarray(points, dtype=complex).ravel()
    m = np.ones(z.size) if masses is None else np.asarray(masses, dtype=float).ravel()
    return Discretization(z, m, np.full(z.size, "atom"))


def discretize(mu, n_theta=512, n_r=64, check=True):
    """Tensor quadrature of ``mu`` mapped through ``psi``, plus all atoms and sigma nodes."""
    if n_theta < 64 or n_r < 16:
        raise ValueError("need n_theta >= 64 and n_r >= 16")
    mp = mu.map
    theta, wt = angular_rule(n_theta, mu.angular.breakpoints + mu.h.breakpoints)
    wt = wt * mu.angular.density(theta)
    if mu.angular.atoms:
        theta = np.concatenate([theta, [t for t, _ in mu.angular.atoms]])
        wt = np.concatenate([wt, [m for _, m in mu.angular.atoms]])

    r, wr = mu.radial.nodes(n_r)
    if mu.radial.atoms:
        r = np.concatenate([r, [a for a, _ in mu.radial.atoms]])
        wr = np.concatenate([wr, [m for _, m in mu.radial.atoms]])

    w = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    weights = (wr[:, None] * wt[None, :]).ravel() * mu.h(w)
    keep = weights > 0
    w, weights = w[keep], weights[keep]
    nodes = [psi_eval(mp, w)]
    wts = [weights]
    prov = [np.full(w.size, "annulus-quadrature")]
    pre = [w]

    def append(points, tag, preimages=None):
        if not points:
            return
        z = np.array([p for p, _ in points], dtype=complex)
        nodes.append(z)
        wts.append(np.array([m for _, m in points]))
        prov.append(np.full(z.size, tag))
        pre.append(np.full(z.size, np.nan + 0j) if preimages is None else preimages)

    offset = nodes[0].size
    ext_idx = np.arange(offset, offset + mu.m)
    append(mu.exterior_atoms, "atom", np.array([phi_eval(mp, z) for z, _ in mu.exterior_atoms]))
    bnd_idx = np.arange(offset + mu.m, offset + mu.m + mu.ell)
    append(mu.boundary_atoms, "atom", np.array([phi_eval(mp, z) for z, _ in mu.boundary_atoms]))
    append(mu.sigma1, "sigma1")
    if mu.sigma2:
        sw = np.array([w for w, _ in mu.sigma2])
        append([(psi_eval(mp, x), m) for x, m in mu.sigma2], "sigma2", sw)

    disc = Discretization(
        np.concatenate(nodes),
        np.concatenate(wts),
        np.concatenate(prov),
        np.concatenate(pre),
        ext_idx,
        bnd_idx,
    )
    if check:
        ref = mu.total_mass()
        if abs(disc.mass - ref) > MASS_RTOL * ref:
            raise ResolutionError(
                f"discrete mass {disc.mass!r} differs from {ref!r} by more than {MASS_RTOL:g} relative"
            )
        object.__setattr__(disc, "reference_mass", ref)
    return disc


def _independent_mass(mu):
    """Nested ``scipy.integrate.quad`` for the product part plus exact atom sums."""
    kw = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    ang = mu.angular
    bps = sorted({b % TWO_PI for b in ang.breakpoints + mu.h.breakpoints})

    def theta_integral(f):
        edges = [0.0] + [b for b in bps if 0 < b < TWO_PI] + [TWO_PI]
        return sum(integrate.quad(f, a, b, **kw)[0] for a, b in zip(edges[:-1], edges[1:])) / TWO_PI

    def at_radius(r):
        ac = theta_integral(lambda t: float(ang.density(t) * mu.h(r * np.exp(1j * t))))
        sing = sum(m * float(mu.h(r * np.exp(1j * t))) for t, m in ang.atoms)
        return ac + sing

    tau = mu.radial
    if mu.h.constant is not None:
        nu_mass = theta_integral(lambda t: float(ang.density(t))) + sum(m for _, m in ang.atoms)
        product = mu.h.constant * nu_mass * tau.total_mass()
    else:
        product = sum(m * at_radius(r) for r, m in tau.atoms)
        if tau.density is not None:
            product += integrate.quad(lambda r: tau.density(r) * at_radius(r), tau.lo, 1.0, **kw)[0]
    extra = sum(m for _, m in mu.sigma1 + mu.sigma2 + mu.exterior_atoms + mu.boundary_atoms)
    return float(product + extra)


def integrate_disc(disc, f):
    """``sum f(node) * weight``."""
    return complex(np.sum(f(disc.nodes) * disc.weights))


def gram_matrix(disc, n):
    """``G[j, k] = int z**j conj(z)**k d mu`` for ``0 <= j, k <= n``."""
    if disc.size < n + 1:
        raise ValueError("need at least n+1 nodes")
    V = disc.nodes[:, None] ** np.arange(n + 1)[None, :]
    G = (V * disc.weights[:, None]).T @ V.conj()
    G = 0.5 * (G + G.conj().T)
    ev = np.linalg.eigvalsh(G)
    if ev[0] < 1e-13 * ev[-1]:
        warnings.warn(
            f"Gram matrix of order {n + 1} is ill-conditioned (eigenvalue ratio {ev[0] / ev[-1]:.3g})",
            ConditioningWarning,
            stacklevel=2,
        )
    return G


def mobius(z, x0):
    """Disk automorphism sending ``x0`` to 0 with positive derivative there."""
    return (z - x0) / (1.0 - np.conj(x0) * z)


def mobius_pushforward(disc, x0, tol=1e-10):
    x0 = complex(x0)
    if abs(x0) >= 1:
        raise DomainError("need |x0| < 1")
    z = mobius(disc.nodes, x0)
    if np.any(np.abs(z) > 1.0 + tol):
        raise DomainError("pushed node lands outside the closed disk")
    return Discretization(z, disc.weights.copy(), disc.provenance.copy())


# -- the cubic lemniscate region {|z^3 - 1| < 1} --------------------------------------


CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)


def lemniscate_nodes(r, n_theta):
    """Nodes on ``{|z**3 - 1| = r}`` with arc-length weights ``|dz|``.

    Each of the three branches is ``omega**k (1 + r e^{i a})**(1/3)``.  For
    ``r`` near 1 the arc-length density ``r / (3 |z|**2)`` peaks at ``a = pi``;
    the angle is reparametrized by the circle automorphism
    ``tan((a - pi)/2) = s tan((u - pi)/2)`` with ``s = sqrt((1-r)/2)``, which
    clusters nodes there and keeps the trapezoid rule in ``u`` geometric.
    """
    u = TWO_PI * (np.arange(n_theta) + 0.5) / n_theta
    s = min(1.0, np.sqrt(max(1.0 - r, 1e-16) / 2.0))
    a = np.pi + 2.0 * np.arctan(s * np.tan((u - np.pi) / 2.0))
    half = np.tan((u - np.pi) / 2.0)
    da_du = s * (1.0 + half**2) / (1.0 + (s * half) ** 2)
    base = (1.0 + r * np.exp(1j * a)) ** (1.0 / 3.0)
    z = (CUBE_ROOTS[:, None] * base[None, :]).ravel()
    arc = np.tile(r / (3.0 * np.abs(base) ** 2) * da_du * (TWO_PI / n_theta), 3)
    return z, arc


def lemniscate_level_length(r):
    """Length of ``{|z**3 - 1| = r}`` by adaptive quadrature (independent oracle)."""
    f = lambda a: r * abs(1.0 + r * np.exp(1j * a)) ** (-2.0 / 3.0)  # noqa: E731
    kw = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    return integrate.quad(f, 0.0, np.pi, **kw)[0] + integrate.quad(f, np.pi, TWO_PI, **kw)[0]


def lemniscate_measure(tau, h=None, n_theta=512, n_r=16, r_levels=None, r_reject=1e-3, check=True):
    """``int f d mu = int int_{Xi_r} f h d(arclength) d tau(r)`` on ``{|z**3 - 1| < 1}``.

    ``r_levels`` optionally supplies ``(radii, weights)`` for ``tau``; otherwise
    ``tau.nodes(n_r)`` plus its atoms are used.  Levels with ``r > 1 - r_reject``
    are refused because the branches meet at the triple point ``z = 0``.
    """
    h = h or (lambda z: np.ones(np.shape(z)))
    if r_levels is None:
        r, wr = tau.nodes(n_r)
        if tau.atoms:
            r = np.concatenate([r, [a for a, _ in tau.atoms]])
            wr = np.concatenate([wr, [m for _, m in tau.atoms]])
    else:
        r, wr = (np.asarray(x, dtype=float) for x in r_levels)
    if np.any(r > 1.0 - r_reject) or np.any(r <= 0):
        raise DomainError(f"lemniscate levels must lie in (0, 1 - {r_reject:g}]")
    probe = np.exp(1j * np.linspace(0.1, 6.0, 37)) * np.linspace(0.2, 1.2, 37)
    if not np.allclose(h(probe), h(CUBE_ROOTS[1] * probe), rtol=1e-12, atol=0):
        raise ValueError("h must be invariant under rotation by 2 pi / 3")
    zs, ws = [], []
    for rk, wk in zip(r, wr):
        z, arc = lemniscate_nodes(rk, n_theta)
        zs.append(z)
        ws.append(wk * arc * h(z))
    disc = Discretization(np.concatenate(zs), np.concatenate(ws), np.full(sum(z.size for z in zs), "annulus-quadrature"))
    if check:
        ref = sum(wk * lemniscate_level_length(rk) for rk, wk in zip(r, wr)) if _h_is_one(h) else None
        if ref is not None and abs(disc.mass - ref) > MASS_RTOL * ref:
            raise ResolutionError(f"lemniscate mass {disc.mass!r} vs arc-length oracle {ref!r}")
    return disc


def _h_is_one(h):
    probe = np.linspace(-1, 1, 7) + 0.3j
    return np.all(h(probe) == 1.0)
