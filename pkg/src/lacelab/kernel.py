"""Spread-out step distributions on Z^d and their Fourier-side quantities.

A step kernel is a finitely supported probability mass function D on the
integer lattice, invariant under coordinate sign flips and permutations.
Everything downstream consumes it through its Fourier transform
D_hat(k) = sum_x D(x) cos(k.x) and the symbol a(k) = 1 - D_hat(k).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "StepDistribution",
    "AssumptionDReport",
    "RegimeUncoveredError",
    "make_uniform_box",
    "fourier",
    "a_of_k",
    "moment",
    "check_assumption_d",
    "axis_ray",
    "diagonal_ray",
    "log_radial_samples",
    "tensor_grid",
    "assumption_d_samples",
]


class RegimeUncoveredError(ValueError):
    """A required ||k||_inf regime contains no sample points."""


def _symmetry_generators(point):
    """Neighbouring images of a lattice point under the hyperoctahedral group.

    Single-axis sign flips plus adjacent transpositions generate the full
    group, so checking these on every support point checks full invariance.
    """
    d = len(point)
    for i in range(d):
        q = list(point)
        q[i] = -q[i]
        yield tuple(q)
    for i in range(d - 1):
        q = list(point)
        q[i], q[i + 1] = q[i + 1], q[i]
        yield tuple(q)


@dataclass(frozen=True)
class StepDistribution:
    """Finite symmetric step kernel D on Z^d.

    Attributes
    ----------
    d : spatial dimension.
    L : spread-out range; the support fits in the box ||x||_inf <= L.
    points : (n, d) integer array of support points.
    masses : (n,) probabilities, nonnegative, summing to 1.
    moment_order : the eps in the 2+2*eps moment that is reported finite
        (every moment of a finite kernel is finite; the field records which
        one downstream parameter checks refer to).
    """

    d: int
    L: int
    points: np.ndarray
    masses: np.ndarray
    moment_order: float = 0.5
    sigma2: float = field(init=False, default=0.0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        ms = np.asarray(self.masses, dtype=float)
        if self.d < 1 or self.L < 1:
            raise ValueError("d and L must be positive integers")
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise ValueError(f"points must have shape (n, {self.d})")
        if ms.shape != (pts.shape[0],):
            raise ValueError("masses must match points in length")
        if np.any(ms < 0):
            raise ValueError("masses must be nonnegative")
        total = float(ms.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"masses must sum to 1, got {total!r}")
        if np.any(np.abs(pts).max(axis=1) > self.L):
            raise ValueError("support exceeds ||x||_inf <= L")
        if self.moment_order <= 0:
            raise ValueError("moment_order must be positive")
        table = {tuple(int(c) for c in p): m for p, m in zip(pts, ms)}
        if len(table) != len(pts):
            raise ValueError("duplicate support points")
        for p, m in table.items():
            for q in _symmetry_generators(p):
                if table.get(q) != m:
                    raise ValueError(
                        f"support not invariant under lattice symmetries at {p}"
                    )
        pts.setflags(write=False)
        ms.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", ms)
        sq = np.einsum("nd,nd->n", pts.astype(float), pts.astype(float))
        object.__setattr__(self, "sigma2", float(sq @ ms))

    # -- Fourier side ----------------------------------------------------

    def fourier(self, k):
        """D_hat(k) = sum_x D(x) cos(k.x) for k of shape (d,) or (nk, d).

        Frequencies are canonicalized (coordinates made nonnegative and
        sorted) before evaluation; the kernel symmetries make that exact,
        and it renders the value bitwise invariant under sign flips and
        permutations of k.
        """
        k = np.asarray(k, dtype=float)
        kc = np.sort(np.abs(k), axis=-1)
        phases = kc @ self.points.T.astype(float)
        out = np.cos(phases) @ self.masses
        return float(out) if out.ndim == 0 else out

    def a(self, k):
        """a(k) = 1 - D_hat(k); vanishes quadratically at k = 0."""
        return 1.0 - self.fourier(k)

    def moment(self, order):
        """sum_x |x|^order D(x) with |.| the Euclidean norm.

        Powers are taken of |x|^2 directly so moment(2) reproduces sigma2
        bit for bit.
        """
        if order < 0:
            raise ValueError("order must be nonnegative")
        rsq = np.einsum("nd,nd->n", self.points.astype(float),
                        self.points.astype(float))
        powed = rsq ** (order / 2.0)  # 0^0 = 1 covers the origin at order 0
        return float(powed @ self.masses)

    @property
    def max_mass_ratio(self):
        """||D||_inf * L^d, the empirical constant of the sup-norm bound."""
        return float(self.masses.max()) * self.L ** self.d

    @property
    def sigma2_ratio(self):
        """sigma^2 / L^2, the empirical constant of the variance bound."""
        return self.sigma2 / self.L ** 2

    # -- serialization ---------------------------------------------------

    def to_json(self):
        """Serialize as (integer coordinates, rational mass) records."""
        recs = []
        n = len(self.masses)
        uniform = np.all(self.masses == self.masses[0])
        for p, m in zip(self.points, self.masses):
            if uniform:
                frac = Fraction(1, n)
            else:
                frac = Fraction(float(m)).limit_denominator(10 ** 15)
            recs.append({
                "x": [int(c) for c in p],
                "mass": [frac.numerator, frac.denominator],
            })
        return json.dumps({
            "d": self.d,
            "L": self.L,
            "moment_order": self.moment_order,
            "support": recs,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        pts = np.array([r["x"] for r in doc["support"]], dtype=np.int64)
        ms = np.array([Fraction(r["mass"][0], r["mass"][1])
                       for r in doc["support"]], dtype=float)
        return cls(d=int(doc["d"]), L=int(doc["L"]), points=pts, masses=ms,
                   moment_order=float(doc.get("moment_order", 0.5)))


def make_uniform_box(d, L, include_origin=False, moment_order=0.5):
    """Uniform kernel on the box ||x||_inf <= L, origin excluded by default.

    With the origin excluded (the usual spread-out convention) the masses are
    1/((2L+1)^d - 1); including it gives the plain uniform box.
    """
    if d < 1 or L < 1:
        raise ValueError("d and L must be positive integers")
    pts = [p for p in itertools.product(range(-L, L + 1), repeat=d)
           if include_origin or any(c != 0 for c in p)]
    pts = np.array(pts, dtype=np.int64)
    masses = np.full(len(pts), 1.0 / len(pts))
    return StepDistribution(d=d, L=L, points=pts, masses=masses,
                            moment_order=moment_order)


# -- module-level operation aliases ---------------------------------------

def fourier(dist, k):
    return dist.fourier(k)


def a_of_k(dist, k):
    return dist.a(k)


def moment(dist, order):
    return dist.moment(order)


# -- verification ----------------------------------------------------------

@dataclass(frozen=True)
class AssumptionDReport:
    """Empirically tightest constants for the three a(k) bounds.

    holds_bound1: c1 L^2|k|^2 <= a(k) <= c2 L^2|k|^2 on 0 < ||k||_inf <= 1/L
    holds_bound2: a(k) > eta on ||k||_inf >= 1/L
    holds_bound3: a(k) < 2 - eta everywhere

    The constants are the tightest consistent with the sample set only; no
    universal claim is made.  worst_k is the sample where the binding (or
    failing) bound is attained.
    """

    eta: float
    c1: float
    c2: float
    holds_bound1: bool
    holds_bound2: bool
    holds_bound3: bool
    worst_k: np.ndarray


def check_assumption_d(dist, k_samples):
    ks = np.atleast_2d(np.asarray(k_samples, dtype=float))
    if ks.size == 0:
        raise RegimeUncoveredError("empty sample set")
    if ks.shape[1] != dist.d:
        raise ValueError("k samples have wrong dimension")
    kinf = np.abs(ks).max(axis=1)
    ksq = np.einsum("nd,nd->n", ks, ks)
    avals = dist.a(ks)
    inv_l = 1.0 / dist.L

    small = (kinf <= inv_l * (1 + 1e-12)) & (kinf > 0)
    large = kinf >= inv_l * (1 - 1e-12)
    if not small.any():
        raise RegimeUncoveredError("regime uncovered: no 0 < ||k||_inf <= 1/L samples")
    if not large.any():
        raise RegimeUncoveredError("regime uncovered: no ||k||_inf >= 1/L samples")

    quad = avals[small] / (dist.L ** 2 * ksq[small])
    c1 = float(quad.min())
    c2 = float(quad.max())
    eta_large = float(avals[large].min())
    eta_high = 2.0 - float(avals.max())

    holds1 = c1 > 0.0
    holds2 = eta_large > 0.0
    holds3 = eta_high > 0.0
    eta = max(0.0, min(eta_large, eta_high))

    small_idx = np.flatnonzero(small)
    large_idx = np.flatnonzero(large)
    if not holds3:
        worst = ks[int(np.argmax(avals))]
    elif not holds2:
        worst = ks[large_idx[int(np.argmin(avals[large]))]]
    elif not holds1:
        worst = ks[small_idx[int(np.argmin(quad))]]
    elif eta_large <= eta_high:
        worst = ks[large_idx[int(np.argmin(avals[large]))]]
    else:
        worst = ks[int(np.argmax(avals))]

    return AssumptionDReport(eta=eta, c1=c1, c2=c2, holds_bound1=holds1,
                             holds_bound2=holds2, holds_bound3=holds3,
                             worst_k=np.array(worst, dtype=float))


# -- k-sample generators ----------------------------------------------------

def axis_ray(d, count=64, k_max=math.pi, k_min=None):
    """count points t*e_1 with t in (0, k_max] (linear spacing)."""
    if k_min is None:
        t = np.linspace(0.0, k_max, count + 1)[1:]
    else:
        t = np.linspace(k_min, k_max, count)
    ks = np.zeros((len(t), d))
    ks[:, 0] = t
    return ks


def diagonal_ray(d, count=64, k_max=math.pi, k_min=None):
    """count points t*(1,...,1) with t in (0, k_max]; ||k||_inf = t."""
    if k_min is None:
        t = np.linspace(0.0, k_max, count + 1)[1:]
    else:
        t = np.linspace(k_min, k_max, count)
    return np.repeat(t[:, None], d, axis=1)


def log_radial_samples(d, count=48, k_min=1e-4, k_max=math.pi):
    """Log-spaced magnitudes along the first axis and the main diagonal."""
    mags = np.geomspace(k_min, k_max, count)
    ax = np.zeros((count, d))
    ax[:, 0] = mags
    diag = np.repeat((mags / math.sqrt(d))[:, None], d, axis=1)
    return np.vstack([ax, diag])


def tensor_grid(d, n_per_axis):
    """Full tensor grid on [-pi, pi]^d; offered for d <= 3 only."""
    if d > 3:
        raise ValueError("tensor grids are offered only for d <= 3")
    axes = [np.linspace(-math.pi, math.pi, n_per_axis)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def assumption_d_samples(dist, per_regime=64):
    """Sample set covering both ||k||_inf regimes of the a(k) bounds."""
    inv_l = 1.0 / dist.L
    small = np.vstack([
        axis_ray(dist.d, per_regime, k_max=inv_l),
        diagonal_ray(dist.d, per_regime, k_max=inv_l),
    ])
    large = np.vstack([
        axis_ray(dist.d, per_regime, k_min=inv_l, k_max=math.pi),
        diagonal_ray(dist.d, per_regime, k_min=inv_l, k_max=math.pi),
    ])
    return np.vstack([small, large, log_radial_samples(dist.d)])
