"""Solve the time-convolution recursion pointwise in k.

f_0 = 1 and f_{n+1}(k;z) = sum_{m=1}^{n+1} g_m(k;z) f_{n+1-m}(k;z) + e_{n+1}(k;z).

The recursion convolves in the time index only, so the k-set can be sparse
and high-dimensional; each k is an independent column.  The m-sum is taken
over the contiguous axis so numpy's pairwise reduction keeps accumulation
error at the O(eps log n) level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .models import HorizonError

__all__ = [
    "RecursionState",
    "NonFiniteValueError",
    "solve",
    "solve_at_zero",
    "laplacian_at_zero",
]

DEFAULT_MAX_HORIZON = 2 ** 14
_CHUNK_ELEMENTS = 1 << 24


class NonFiniteValueError(RuntimeError):
    """A non-finite value appeared while filling the f-table."""


@dataclass
class RecursionState:
    """Solved f-table at a fixed fugacity over a chosen k-set.

    f has shape (horizon+1, nk); laplacian0[m] holds the exact k=0 Laplacian
    of f_m from the companion recursion when requested.
    """

    model: object
    z: float
    k_points: np.ndarray
    horizon: int
    f: np.ndarray
    laplacian0: np.ndarray | None = None
    f_at_zero: np.ndarray | None = None

    def evaluate(self, k_new):
        """f_m at additional frequencies, same model, z and horizon."""
        return _solve_table(self.model, self.z, k_new, self.horizon)

    def zero_column(self):
        """Index of the k = 0 column, or None if absent."""
        hits = np.flatnonzero(np.all(self.k_points == 0.0, axis=1))
        return int(hits[0]) if len(hits) else None

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("m,k_index,f\n")
            for m in range(self.horizon + 1):
                for j in range(self.k_points.shape[0]):
                    fh.write(f"{m},{j},{self.f[m, j]!r}\n")

    def to_json_dict(self):
        doc = {
            "z": self.z,
            "horizon": self.horizon,
            "k_points": self.k_points.tolist(),
            "f": self.f.tolist(),
        }
        if self.laplacian0 is not None:
            doc["laplacian0"] = self.laplacian0.tolist()
        return doc

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)


def _convolve_forward(g_cols, e_cols, nk, horizon):
    """Fill f columns; g_cols/e_cols have shape (nk, horizon+1)."""
    f = np.empty((nk, horizon + 1))
    f[:, 0] = 1.0
    for n in range(horizon):
        block = g_cols[:, 1:n + 2] * f[:, n::-1]
        col = block.sum(axis=1)
        if e_cols is not None:
            col += e_cols[:, n + 1]
        if not np.all(np.isfinite(col)):
            j = int(np.flatnonzero(~np.isfinite(col))[0])
            raise NonFiniteValueError(
                f"non-finite f at m={n + 1}, k index {j}")
        f[:, n + 1] = col
    return f


def _solve_table(model, z, ks, horizon):
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    nk = ks.shape[0]
    out = np.empty((horizon + 1, nk))
    chunk = max(1, _CHUNK_ELEMENTS // (horizon + 1))
    for lo in range(0, nk, chunk):
        sub = ks[lo:lo + chunk]
        g_tab = model.g_block(sub, z, horizon)
        if not np.all(np.isfinite(g_tab)):
            m_bad, j_bad = np.argwhere(~np.isfinite(g_tab))[0]
            raise NonFiniteValueError(
                f"non-finite coefficient g at m={m_bad}, k index {lo + j_bad}")
        g_cols = np.ascontiguousarray(g_tab.T)
        e_cols = None
        if model.has_e:
            e_cols = np.ascontiguousarray(model.e_block(sub, z, horizon).T)
        out[:, lo:lo + chunk] = _convolve_forward(
            g_cols, e_cols, sub.shape[0], horizon).T
    return out


def solve(model, z, k_points, horizon, with_laplacian=False,
          max_horizon=DEFAULT_MAX_HORIZON):
    """Direct evaluation of the convolution at each fixed k; O(n^2 |k_set|)."""
    if z <= 0:
        raise ValueError("z must be positive")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if horizon > model.n_max:
        raise HorizonError(f"horizon {horizon} exceeds model n_max {model.n_max}")
    if horizon > max_horizon:
        raise HorizonError(f"horizon {horizon} exceeds cap {max_horizon}")
    ks = np.atleast_2d(np.asarray(k_points, dtype=float))
    f = _solve_table(model, z, ks, horizon)
    state = RecursionState(model=model, z=z, k_points=ks, horizon=horizon, f=f)
    if with_laplacian:
        f0, lap0 = solve_at_zero(model, z, horizon)
        state.laplacian0 = lap0
        state.f_at_zero = f0
    return state


def solve_at_zero(model, z, horizon):
    """Companion recursion at k = 0 for f and its Laplacian, no differences.

    Differentiating the recursion twice at k = 0 couples the value and
    Laplacian sequences through the coefficients' k=0 data, which analytic
    and enumerated models supply exactly.
    """
    g0 = model.g_at_zero(z, horizon)
    gl0 = model.g_laplacian_block_at_zero(z, horizon)
    e0 = model.e_at_zero(z, horizon) if model.has_e else np.zeros(horizon + 1)
    el0 = (model.e_laplacian_block_at_zero(z, horizon)
           if model.has_e else np.zeros(horizon + 1))
    f0 = np.empty(horizon + 1)
    lap = np.empty(horizon + 1)
    f0[0] = 1.0
    lap[0] = 0.0
    for n in range(horizon):
        fr = f0[n::-1]
        lr = lap[n::-1]
        gs = g0[1:n + 2]
        f0[n + 1] = np.dot(gs, fr) + e0[n + 1]
        lap[n + 1] = np.dot(gl0[1:n + 2], fr) + np.dot(gs, lr) + el0[n + 1]
    if not np.all(np.isfinite(f0)) or not np.all(np.isfinite(lap)):
        m_bad = int(np.flatnonzero(~(np.isfinite(f0) & np.isfinite(lap)))[0])
        raise NonFiniteValueError(f"non-finite value at m={m_bad}, k=0")
    return f0, lap


def laplacian_at_zero(model, z, m, h=None):
    """Finite-difference estimate of the k-Laplacian of f_m at 0.

    By permutation symmetry all axis directions agree at 0, so
    lap f(0) ~ 2d (f(h e_1) - f(0)) / h^2; one Richardson step in (h, h/2)
    removes the leading h^2 error.  This is the independent cross-check of
    the companion recursion, not the primary path.
    """
    if m == 0:
        return 0.0
    if h is None:
        h = 1e-3 / (model.kernel.L * np.sqrt(m))
    if h <= 0:
        raise ValueError("h must be positive")
    if h * model.kernel.L > np.pi:
        raise ValueError("h too large for the kernel support")
    d = model.d
    ks = np.zeros((3, d))
    ks[1, 0] = h
    ks[2, 0] = h / 2
    f = _solve_table(model, z, ks, m)
    est_h = 2 * d * (f[m, 1] - f[m, 0]) / h ** 2
    est_h2 = 2 * d * (f[m, 2] - f[m, 0]) / (h / 2) ** 2
    return (4.0 * est_h2 - est_h) / 3.0
