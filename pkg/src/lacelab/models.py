"""Coefficient-sequence providers g_m(k;z), e_m(k;z) for the recursion.

Every model guarantees g_1(k;z) = z*D_hat(k) and e_1 = 0, and full lattice
symmetry in k.  Four kinds are provided:

simple_random_walk : g_m = 0 for m >= 2, e = 0 (memoryless reference).
synthetic_theta    : g_m(k;z) = sign_m * beta0 * z^m * m^-theta * D_hat(k)^m
                     for m >= 2, optionally with a companion family
                     e_m(k) = esign_m * beta0_e * m^-theta * D_hat(k)^m.
weakly_saw         : coefficients deconvolved from an exact enumeration of
                     interacting walks (weight (1-u) per site coincidence).
extracted          : coefficients deconvolved from a user-supplied f-table.

For the path-based kinds the fugacity enters as a pure power, so extracted
coefficients scale as g_m(k;z) = (z/z0)^m g_m(k;z0); that grading is taken
as the definition for arbitrary extracted tables as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import StepDistribution

__all__ = [
    "ModelSequences",
    "CoefficientQuery",
    "SimpleRandomWalk",
    "SyntheticTheta",
    "WeaklySelfAvoidingWalk",
    "ExtractedCoefficients",
    "HorizonError",
    "EnumerationBudgetError",
    "IncompleteInputError",
    "UnsupportedQueryError",
    "enumerate_weakly_saw",
    "extract_coefficients",
    "g",
    "e",
    "g_laplacian_at_zero",
    "g_z_derivative_at_zero",
    "write_coefficients_csv",
]

DEFAULT_ANALYTIC_N_MAX = 2 ** 24


class HorizonError(ValueError):
    """Coefficient index beyond the model's horizon n_max."""


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would exceed the configured step budget."""


class IncompleteInputError(ValueError):
    """An f-table handed to extraction is missing required entries."""


class UnsupportedQueryError(ValueError):
    """The model cannot evaluate at the requested point (e.g. off-table k)."""


@dataclass(frozen=True)
class CoefficientQuery:
    """A single coefficient request (m, k, z)."""

    m: int
    k: np.ndarray
    z: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.z <= 0:
            raise ValueError("z must be positive")
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float))


def _fd_z(func, z, h=1e-4):
    """Central difference in z with one Richardson step (O(h^4))."""
    def central(step):
        return (func(z + step) - func(z - step)) / (2.0 * step)
    return (4.0 * central(h / 2) - central(h)) / 3.0


class ModelSequences:
    """Base class: scalar hooks plus vectorized blocks used by the solver.

    Subclasses must implement g_value/e_value and the analytic k=0 data;
    the block methods have generic loop fallbacks that subclasses override
    where a closed form allows vectorization.
    """

    kind = "abstract"
    has_e = False

    def __init__(self, kernel, n_max):
        if n_max < 1:
            raise ValueError("n_max must be positive")
        self.kernel = kernel
        self.n_max = int(n_max)

    @property
    def d(self):
        return self.kernel.d

    def _require_m(self, m):
        if not 1 <= m <= self.n_max:
            raise HorizonError(f"m={m} outside 1..n_max={self.n_max}")

    # -- scalar interface --------------------------------------------------

    def g(self, query):
        self._require_m(query.m)
        return self.g_value(query.m, query.k, query.z)

    def e(self, query):
        self._require_m(query.m)
        return self.e_value(query.m, query.k, query.z)

    def g_value(self, m, k, z):
        raise NotImplementedError

    def e_value(self, m, k, z):
        return 0.0

    def g_laplacian_at_zero(self, m, z):
        raise NotImplementedError

    def e_laplacian_at_zero(self, m, z):
        return 0.0

    def g_z_derivative_at_zero(self, m, z):
        raise NotImplementedError

    # -- vectorized blocks ---------------------------------------------------

    def g_block(self, ks, z, m_max):
        """g_m(k;z) for m = 0..m_max (row 0 is zero) at each k row."""
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        out = np.zeros((m_max + 1, ks.shape[0]))
        for m in range(1, m_max + 1):
            for j, k in enumerate(ks):
                out[m, j] = self.g_value(m, k, z)
        return out

    def e_block(self, ks, z, m_max):
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        out = np.zeros((m_max + 1, ks.shape[0]))
        if self.has_e:
            for m in range(1, m_max + 1):
                for j, k in enumerate(ks):
                    out[m, j] = self.e_value(m, k, z)
        return out

    def g_at_zero(self, z, m_max):
        return self.g_block(np.zeros((1, self.d)), z, m_max)[:, 0]

    def e_at_zero(self, z, m_max):
        return self.e_block(np.zeros((1, self.d)), z, m_max)[:, 0]

    def g_laplacian_block_at_zero(self, z, m_max):
        self._require_m(m_max)
        out = np.zeros(m_max + 1)
        for m in range(1, m_max + 1):
            out[m] = self.g_laplacian_at_zero(m, z)
        return out

    def e_laplacian_block_at_zero(self, z, m_max):
        self._require_m(m_max)
        out = np.zeros(m_max + 1)
        if self.has_e:
            for m in range(1, m_max + 1):
                out[m] = self.e_laplacian_at_zero(m, z)
        return out

    def tail_weight(self, m_cut):
        """Estimate of sum_{m > m_cut} m^{-theta+1} amplitude; 0 if exact."""
        return 0.0


class SimpleRandomWalk(ModelSequences):
    """Memoryless reference model: only g_1 = z*D_hat(k) is nonzero."""

    kind = "simple_random_walk"

    def __init__(self, kernel, n_max=DEFAULT_ANALYTIC_N_MAX):
        super().__init__(kernel, n_max)

    def g_value(self, m, k, z):
        if m == 1:
            return z * self.kernel.fourier(k)
        return 0.0

    def g_laplacian_at_zero(self, m, z):
        self._require_m(m)
        return -z * self.kernel.sigma2 if m == 1 else 0.0

    def g_z_derivative_at_zero(self, m, z):
        self._require_m(m)
        return float(self.kernel.fourier(np.zeros(self.d))) if m == 1 else 0.0

    def g_block(self, ks, z, m_max):
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        out = np.zeros((m_max + 1, ks.shape[0]))
        out[1] = z * self.kernel.fourier(ks)
        return out

    def g_laplacian_block_at_zero(self, z, m_max):
        self._require_m(m_max)
        out = np.zeros(m_max + 1)
        out[1] = -z * self.kernel.sigma2
        return out


def _sign_vector(pattern, m_max):
    if pattern == "+":
        s = np.ones(m_max + 1)
    elif pattern == "-":
        s = -np.ones(m_max + 1)
    elif pattern == "alt":
        s = np.where(np.arange(m_max + 1) % 2 == 0, 1.0, -1.0)
    else:
        raise ValueError(f"unknown sign pattern {pattern!r}")
    return s


class SyntheticTheta(ModelSequences):
    """Closed-form family g_m = sign_m * beta0 * z^m * m^-theta * D_hat^m.

    The D_hat(k)^m dependence makes the magnitude, Laplacian, z-derivative
    and Taylor-remainder envelopes hold with computable amplitudes; the
    alternating sign option exercises cancellation in sum_m g_m(0;z).

    Every coefficient with the D_hat^m profile satisfies the exact identity
    lap h_m(0) = -m sigma^2 h_m(0), which telescopes through the recursion
    and makes -lap f_n(0)/f_n(0) equal v sigma^2 n with zero error at every
    n.  The optional e_profile exponent (e_m carries D_hat^(e_profile*m))
    breaks that degeneracy while keeping all envelope amplitudes
    computable, so finite-horizon corrections become observable.
    """

    kind = "synthetic_theta"

    def __init__(self, kernel, theta, beta0, sign_pattern="+", beta0_e=0.0,
                 e_sign_pattern=None, e_profile=1,
                 n_max=DEFAULT_ANALYTIC_N_MAX):
        super().__init__(kernel, n_max)
        if theta <= 2:
            raise ValueError("theta must exceed 2")
        if beta0 < 0 or beta0_e < 0:
            raise ValueError("amplitudes must be nonnegative")
        if int(e_profile) < 1:
            raise ValueError("e_profile must be a positive integer")
        self.theta = float(theta)
        self.beta0 = float(beta0)
        self.beta0_e = float(beta0_e)
        self.sign_pattern = sign_pattern
        self.e_sign_pattern = e_sign_pattern or sign_pattern
        self.e_profile = int(e_profile)
        _sign_vector(sign_pattern, 2)
        _sign_vector(self.e_sign_pattern, 2)
        self.has_e = beta0_e > 0

    def _sign(self, m, pattern=None):
        pattern = pattern or self.sign_pattern
        if pattern == "+":
            return 1.0
        if pattern == "-":
            return -1.0
        return 1.0 if m % 2 == 0 else -1.0

    def g_value(self, m, k, z):
        dhat = self.kernel.fourier(k)
        if m == 1:
            return z * dhat
        return (self._sign(m) * self.beta0 * z ** m * m ** (-self.theta)
                * dhat ** m)

    def e_value(self, m, k, z):
        if m == 1 or self.beta0_e == 0.0:
            return 0.0
        dhat = self.kernel.fourier(k)
        return (self._sign(m, self.e_sign_pattern) * self.beta0_e
                * m ** (-self.theta) * dhat ** (self.e_profile * m))

    def g_laplacian_at_zero(self, m, z):
        self._require_m(m)
        s2 = self.kernel.sigma2
        if m == 1:
            return -z * s2
        return -s2 * self._sign(m) * self.beta0 * z ** m * m ** (1 - self.theta)

    def e_laplacian_at_zero(self, m, z):
        self._require_m(m)
        if m == 1 or self.beta0_e == 0.0:
            return 0.0
        return (-self.kernel.sigma2 * self._sign(m, self.e_sign_pattern)
                * self.e_profile * self.beta0_e * m ** (1 - self.theta))

    def g_z_derivative_at_zero(self, m, z):
        self._require_m(m)
        if m == 1:
            return float(self.kernel.fourier(np.zeros(self.d)))
        return (self._sign(m) * self.beta0 * m * z ** (m - 1)
                * m ** (-self.theta))

    # -- vectorized closed forms -------------------------------------------

    def _z_powers(self, z, m_max):
        ms = np.arange(m_max + 1, dtype=float)
        if z == 1.0:
            return np.ones(m_max + 1)
        with np.errstate(over="ignore"):
            return np.exp(ms * math.log(z))

    def _coef(self, z, m_max):
        """sign_m * beta0 * z^m * m^-theta for m >= 2 (entries 0,1 are 0)."""
        out = np.zeros(m_max + 1)
        if m_max >= 2:
            ms = np.arange(2, m_max + 1, dtype=float)
            out[2:] = (_sign_vector(self.sign_pattern, m_max)[2:] * self.beta0
                       * self._z_powers(z, m_max)[2:] * ms ** (-self.theta))
        return out

    def g_block(self, ks, z, m_max):
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        nk = ks.shape[0]
        dhat = np.atleast_1d(self.kernel.fourier(ks))
        out = np.empty((m_max + 1, nk))
        out[0] = 0.0
        out[1] = z * dhat
        if m_max >= 2:
            coef = self._coef(z, m_max)
            chunk = max(1, (1 << 24) // (m_max + 1))
            for lo in range(0, nk, chunk):
                hi = min(nk, lo + chunk)
                pows = np.broadcast_to(dhat[lo:hi], (m_max, hi - lo)).copy()
                np.multiply.accumulate(pows, axis=0, out=pows)
                out[2:, lo:hi] = coef[2:, None] * pows[1:]
        return out

    def e_block(self, ks, z, m_max):
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        nk = ks.shape[0]
        out = np.zeros((m_max + 1, nk))
        if not self.has_e or m_max < 2:
            return out
        dhat = np.atleast_1d(self.kernel.fourier(ks)) ** self.e_profile
        ms = np.arange(2, m_max + 1, dtype=float)
        coef = (_sign_vector(self.e_sign_pattern, m_max)[2:] * self.beta0_e
                * ms ** (-self.theta))
        chunk = max(1, (1 << 24) // (m_max + 1))
        for lo in range(0, nk, chunk):
            hi = min(nk, lo + chunk)
            pows = np.broadcast_to(dhat[lo:hi], (m_max, hi - lo)).copy()
            np.multiply.accumulate(pows, axis=0, out=pows)
            out[2:, lo:hi] = coef[:, None] * pows[1:]
        return out

    def g_laplacian_block_at_zero(self, z, m_max):
        self._require_m(m_max)
        out = np.zeros(m_max + 1)
        out[1] = -z * self.kernel.sigma2
        if m_max >= 2:
            ms = np.arange(2, m_max + 1, dtype=float)
            out[2:] = (-self.kernel.sigma2
                       * _sign_vector(self.sign_pattern, m_max)[2:]
                       * self.beta0 * self._z_powers(z, m_max)[2:]
                       * ms ** (1 - self.theta))
        return out

    def e_laplacian_block_at_zero(self, z, m_max):
        self._require_m(m_max)
        out = np.zeros(m_max + 1)
        if self.has_e and m_max >= 2:
            ms = np.arange(2, m_max + 1, dtype=float)
            out[2:] = (-self.kernel.sigma2 * self.e_profile
                       * _sign_vector(self.e_sign_pattern, m_max)[2:]
                       * self.beta0_e * ms ** (1 - self.theta))
        return out

    def tail_weight(self, m_cut):
        # integral bound for sum_{m > m_cut} m^{-theta+1}
        return ((self.beta0 + self.beta0_e)
                * m_cut ** (2.0 - self.theta) / (self.theta - 2.0))


# -- exact enumeration of weakly self-avoiding walks -------------------------

def _enumeration_cost(n_support, n_max):
    total = 0
    layer = 1
    for _ in range(n_max):
        layer *= n_support
        total += layer
        if total > 10 ** 16:
            break
    return total


def _enumerate_endpoint_weights(kernel, u, n_max):
    """Endpoint weight tables W_n(x) for all 1 <= n <= n_max.

    W_n(x) sums, over all n-step D-walks from 0 ending at x, the product of
    step probabilities times (1-u) per pair of coinciding sites (the origin
    at time 0 included).  f_n(k;z) = z^n sum_x W_n(x) cos(k.x).
    """
    d = kernel.d
    steps = [tuple(int(c) for c in p) for p in kernel.points]
    probs = [float(m) for m in kernel.masses]
    origin = (0,) * d
    acc = [dict() for _ in range(n_max + 1)]
    acc[0][origin] = 1.0
    one_minus_u = 1.0 - u

    def dfs(pos, depth, weight, visits):
        nxt = depth + 1
        bucket = acc[nxt]
        for dx, p in zip(steps, probs):
            new = tuple(pos[i] + dx[i] for i in range(d))
            seen = visits.get(new, 0)
            w = weight * p * (one_minus_u ** seen if seen else 1.0)
            if w != 0.0:
                bucket[new] = bucket.get(new, 0.0) + w
            if nxt < n_max and w != 0.0:
                visits[new] = seen + 1
                dfs(new, nxt, w, visits)
                if seen:
                    visits[new] = seen
                else:
                    del visits[new]

    dfs(origin, 0, 1.0, {origin: 1})

    tables = [None] * (n_max + 1)
    tables[0] = (np.zeros((1, d), dtype=np.int64), np.ones(1))
    for n in range(1, n_max + 1):
        items = sorted(acc[n].items())
        pts = np.array([it[0] for it in items], dtype=np.int64)
        ws = np.array([it[1] for it in items])
        tables[n] = (pts, ws)
    return tables


class WeaklySelfAvoidingWalk(ModelSequences):
    """Coefficients deconvolved from the exact interacting-walk two-point
    function; e is identically zero by the canonical split."""

    kind = "weakly_saw"

    def __init__(self, kernel, u, n_max, budget=10 ** 8):
        if not 0.0 <= u <= 1.0:
            raise ValueError("u must lie in [0, 1]")
        cost = _enumeration_cost(len(kernel.points), n_max)
        if cost > budget:
            raise EnumerationBudgetError(
                f"enumeration needs {cost} path-steps, budget is {budget}")
        super().__init__(kernel, n_max)
        self.u = float(u)
        self._tables = _enumerate_endpoint_weights(kernel, u, n_max)
        # k = 0 data at z = 1, exact x-space sums
        self._f0 = np.array([float(w.sum()) for _, w in self._tables])
        self._lapf0 = np.array([
            -float((np.einsum("nd,nd->n", p.astype(float), p.astype(float)) * w).sum())
            for p, w in self._tables])
        self._g0 = _deconvolve(self._f0)
        self._lapg0 = _deconvolve_laplacian(self._f0, self._g0, self._lapf0)
        self._gcache = {}

    def f_block(self, ks, z, n_top):
        """f_n(k;z) for n = 0..n_top directly from the endpoint tables.

        Frequencies are canonicalized as in the kernel Fourier transform,
        which is exact because the endpoint weights inherit the lattice
        symmetries.
        """
        if n_top > self.n_max:
            raise HorizonError(f"n={n_top} beyond enumerated horizon {self.n_max}")
        ks = np.sort(np.abs(np.atleast_2d(np.asarray(ks, dtype=float))), axis=-1)
        out = np.empty((n_top + 1, ks.shape[0]))
        zp = 1.0
        for n in range(n_top + 1):
            pts, ws = self._tables[n]
            out[n] = zp * (np.cos(ks @ pts.T.astype(float)) @ ws)
            zp *= z
        return out

    def _g_column(self, k):
        key = np.sort(np.abs(np.asarray(k, dtype=float))).tobytes()
        col = self._gcache.get(key)
        if col is None:
            f = self.f_block(np.asarray(k, dtype=float)[None, :], 1.0,
                             self.n_max)[:, 0]
            col = _deconvolve(f)
            self._gcache[key] = col
        return col

    def g_value(self, m, k, z):
        self._require_m(m)
        return z ** m * self._g_column(k)[m]

    def g_block(self, ks, z, m_max):
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        out = np.zeros((m_max + 1, ks.shape[0]))
        zp = np.exp(np.arange(m_max + 1) * math.log(z)) if z != 1.0 \
            else np.ones(m_max + 1)
        for j in range(ks.shape[0]):
            out[:, j] = self._g_column(ks[j])[:m_max + 1] * zp
        return out

    def g_at_zero(self, z, m_max):
        self._require_m(m_max)
        zp = np.exp(np.arange(m_max + 1) * math.log(z)) if z != 1.0 \
            else np.ones(m_max + 1)
        return self._g0[:m_max + 1] * zp

    def g_laplacian_at_zero(self, m, z):
        self._require_m(m)
        return z ** m * self._lapg0[m]

    def g_laplacian_block_at_zero(self, z, m_max):
        self._require_m(m_max)
        zp = np.exp(np.arange(m_max + 1) * math.log(z)) if z != 1.0 \
            else np.ones(m_max + 1)
        return self._lapg0[:m_max + 1] * zp

    def g_z_derivative_at_zero(self, m, z):
        self._require_m(m)
        return _fd_z(lambda zz: self.g_at_zero(zz, m)[m], z)


def enumerate_weakly_saw(kernel, u, n_max, k_set, z, budget=10 ** 8):
    """f_n(k;z) for n = 0..n_max over k_set by exact path enumeration."""
    model = WeaklySelfAvoidingWalk(kernel, u, n_max, budget=budget)
    return model.f_block(k_set, z, n_max)


# -- deconvolution -----------------------------------------------------------

def _deconvolve(f):
    """g with f_m = sum_{j<=m} g_j f_{m-j} (f_0 = 1, e = 0), per column."""
    f = np.asarray(f, dtype=float)
    one_d = f.ndim == 1
    if one_d:
        f = f[:, None]
    n = f.shape[0] - 1
    g = np.zeros_like(f)
    for m in range(1, n + 1):
        conv = np.einsum("jk,jk->k", g[1:m], f[m - 1:0:-1]) if m > 1 else 0.0
        g[m] = f[m] - conv
    return g[:, 0] if one_d else g


def _deconvolve_laplacian(f0, g0, lapf0):
    """Companion deconvolution for k=0 Laplacians of extracted g."""
    n = len(f0) - 1
    lapg = np.zeros(n + 1)
    for m in range(1, n + 1):
        conv = 0.0
        if m > 1:
            conv = float(np.dot(lapg[1:m], f0[m - 1:0:-1])
                         + np.dot(g0[1:m], lapf0[m - 1:0:-1]))
        lapg[m] = lapf0[m] - conv
    return lapg


class ExtractedCoefficients(ModelSequences):
    """Coefficients tabulated on a fixed k-set at a base fugacity z0.

    Queries at other z use the fugacity grading (z/z0)^m; queries at k not
    in the table raise UnsupportedQueryError.  Laplacians at 0 are available
    when the table contains an axis stencil {0, t e_1, (t/2) e_1}.
    """

    kind = "extracted"
    has_e = False

    def __init__(self, k_points, g_table, z0=1.0, kernel=None):
        self.k_points = np.atleast_2d(np.asarray(k_points, dtype=float))
        g_table = np.asarray(g_table, dtype=float)
        if g_table.ndim == 1:
            g_table = g_table[:, None]
        if g_table.shape[1] != self.k_points.shape[0]:
            raise ValueError("g_table columns must match k_points")
        self.g_table = g_table
        self.z0 = float(z0)
        self.kernel = kernel
        self.n_max = g_table.shape[0] - 1
        self._dim = self.k_points.shape[1]

    @property
    def d(self):
        return self._dim

    def _column_index(self, k):
        k = np.asarray(k, dtype=float)
        hits = np.flatnonzero(np.all(np.abs(self.k_points - k) <= 1e-12, axis=1))
        if len(hits) == 0:
            raise UnsupportedQueryError(
                f"k={k.tolist()} is not a tabulated frequency")
        return int(hits[0])

    def _z_scale(self, z, m_max):
        r = z / self.z0
        if r == 1.0:
            return np.ones(m_max + 1)
        with np.errstate(over="ignore"):
            return np.exp(np.arange(m_max + 1) * math.log(r))

    def g_value(self, m, k, z):
        self._require_m(m)
        return (z / self.z0) ** m * self.g_table[m, self._column_index(k)]

    def g_block(self, ks, z, m_max):
        self._require_m(m_max)
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        cols = [self._column_index(k) for k in ks]
        return self.g_table[:m_max + 1, cols] * self._z_scale(z, m_max)[:, None]

    def g_at_zero(self, z, m_max):
        return self.g_block(np.zeros((1, self.d)), z, m_max)[:, 0]

    def _axis_stencil(self):
        """Smallest t with columns at 0, t e_1 and (t/2) e_1 all tabulated."""
        axis = []
        for idx, k in enumerate(self.k_points):
            if k[0] > 0 and np.all(k[1:] == 0):
                axis.append((float(k[0]), idx))
        ts = {t for t, _ in axis}
        for t, idx in sorted(axis):
            if any(abs(t2 - 2 * t) <= 1e-12 for t2 in ts):
                return 2 * t
        raise UnsupportedQueryError(
            "Laplacian needs tabulated axis stencil {t e_1, (t/2) e_1}")

    def g_laplacian_at_zero(self, m, z):
        self._require_m(m)
        t = self._axis_stencil()
        k0 = np.zeros(self.d)
        kh = np.zeros(self.d)
        kh[0] = t
        kh2 = np.zeros(self.d)
        kh2[0] = t / 2
        g0 = self.g_value(m, k0, z)
        est_h = 2 * self.d * (self.g_value(m, kh, z) - g0) / t ** 2
        est_h2 = 2 * self.d * (self.g_value(m, kh2, z) - g0) / (t / 2) ** 2
        return (4.0 * est_h2 - est_h) / 3.0

    def g_z_derivative_at_zero(self, m, z):
        self._require_m(m)
        return _fd_z(lambda zz: self.g_value(m, np.zeros(self.d), zz), z)


def extract_coefficients(f_values, horizon, k_points=None, z0=1.0, kernel=None):
    """Invert the recursion with e = 0: g_m = f_m - sum_{j<m} g_j f_{m-j}.

    f_values holds f_m(k;z0) for m = 0..horizon (row m) on the k-set; the
    f_0 row must be identically 1.  Re-solving the recursion with the
    returned coefficients reproduces the input table.
    """
    f = np.asarray(f_values, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] < horizon + 1:
        raise IncompleteInputError(
            f"need f_m for all m <= {horizon}, got {f.shape[0] - 1}")
    f = f[:horizon + 1]
    if not np.all(np.isfinite(f)):
        raise IncompleteInputError("f-table contains non-finite entries")
    if not np.allclose(f[0], 1.0, rtol=0, atol=1e-12):
        raise IncompleteInputError("f_0 must be identically 1")
    if k_points is None:
        k_points = np.arange(f.shape[1], dtype=float)[:, None]
    g_table = _deconvolve(f)
    return ExtractedCoefficients(k_points=k_points, g_table=g_table, z0=z0,
                                 kernel=kernel)


# -- module-level operation aliases ------------------------------------------

def g(model, query):
    return model.g(query)


def e(model, query):
    return model.e(query)


def g_laplacian_at_zero(model, m, z):
    model._require_m(m)
    return model.g_laplacian_at_zero(m, z)


def g_z_derivative_at_zero(model, m, z):
    model._require_m(m)
    return model.g_z_derivative_at_zero(m, z)


def write_coefficients_csv(path, model, k_points, z, horizon):
    """Export g and e on a k-set as CSV rows (m, k_index, z, g, e)."""
    ks = np.atleast_2d(np.asarray(k_points, dtype=float))
    gt = model.g_block(ks, z, horizon)
    et = model.e_block(ks, z, horizon)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,k_index,z,g,e\n")
        for m in range(1, horizon + 1):
            for j in range(ks.shape[0]):
                fh.write(f"{m},{j},{z!r},{gt[m, j]!r},{et[m, j]!r}\n")
