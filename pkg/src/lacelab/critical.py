"""Critical point and limiting constants of the recursion.

The fugacity sequence z_n, the variance-drift sequences b_n, c_n, v_n, and
the truncated fixed-point equation 1 = sum_{m<=M} g_m(0;z_c) that locates
the critical point, together with the limiting constants

    A = (1 + sum_m e_m(0;z_c)) / sum_m m g_m(0;z_c),
    v = - sum_m lap g_m(0;z_c) / (sigma^2 sum_m m g_m(0;z_c)).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "SequenceState",
    "CriticalConstants",
    "DegenerateDenominatorError",
    "NoRootError",
    "sequences",
    "z_sequence",
    "build_sequence_state",
    "intervals",
    "solve_zc",
]


class DegenerateDenominatorError(ZeroDivisionError):
    """1 + c_n vanished, so v_n is undefined."""


class NoRootError(RuntimeError):
    """The truncated fixed-point equation has no sign change in the bracket."""


@dataclass
class SequenceState:
    """Per-n sequences at a fixed fugacity plus the z_n iteration.

    b, c, v have length n+1 with index 0 holding the conventions
    b_0 = v_0 = 1, c_0 = 0.  z_values holds z_0..z_n from the defining
    iteration and increments[j] = |z_{j+1} - z_j| (length n).
    """

    n: int
    z: float | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None
    v: np.ndarray | None = None
    z_values: np.ndarray | None = None
    increments: np.ndarray | None = None

    def intervals(self, params):
        return intervals(self.z_values, params.K1, params.beta, params.theta)


def sequences(model, z, n):
    """Partial sums b_n, c_n, v_n at fugacity z, for all 0 <= j <= n."""
    if n < 1:
        raise ValueError("n must be positive")
    g0 = model.g_at_zero(z, n)
    gl0 = model.g_laplacian_block_at_zero(z, n)
    s2 = model.kernel.sigma2
    b = np.empty(n + 1)
    c = np.empty(n + 1)
    b[0] = 1.0
    c[0] = 0.0
    b[1:] = -np.cumsum(gl0[1:]) / s2
    ms = np.arange(1, n + 1, dtype=float)
    c[1:] = np.cumsum((ms - 1.0) * g0[1:])
    denom = 1.0 + c
    bad = np.flatnonzero(np.abs(denom) < 1e-12)
    if len(bad):
        raise DegenerateDenominatorError(
            f"1 + c_n = 0 at n = {int(bad[0])}")
    v = b / denom
    return SequenceState(n=n, z=z, b=b, c=c, v=v)


def z_sequence(model, n):
    """The iteration z_0 = z_1 = 1, z_{n+1} = 1 - sum_{m=2}^{n+1} g_m(0;z_n)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    zs = np.empty(n + 1)
    zs[0] = 1.0
    if n >= 1:
        zs[1] = 1.0
    for j in range(1, n):
        g0 = model.g_at_zero(zs[j], j + 1)
        total = float(g0[2:].sum()) if j + 1 >= 2 else 0.0
        if not np.isfinite(total):
            raise NonFiniteSequenceError(
                f"non-finite coefficient sum at step {j + 1}")
        zs[j + 1] = 1.0 - total
    return SequenceState(n=n, z_values=zs, increments=np.abs(np.diff(zs)))


class NonFiniteSequenceError(RuntimeError):
    """The z iteration produced a non-finite coefficient sum."""


def build_sequence_state(model, z, n):
    """Full state (b, c, v at z together with the z_n iteration)."""
    seq = sequences(model, z, n)
    zit = z_sequence(model, n)
    seq.z_values = zit.z_values
    seq.increments = zit.increments
    return seq


def intervals(z_values, K1, beta, theta):
    """I_n = [z_n - K1 beta n^{-theta+1}, z_n + K1 beta n^{-theta+1}], n >= 1."""
    if z_values is None:
        raise ValueError("z_values required; run z_sequence first")
    ns = np.arange(1, len(z_values), dtype=float)
    half = K1 * beta * ns ** (1.0 - theta)
    lo = z_values[1:] - half
    hi = z_values[1:] + half
    return np.stack([lo, hi], axis=1)


@dataclass(frozen=True)
class CriticalConstants:
    z_c: float
    A: float
    v: float
    M: int
    residual: float
    tail_estimate: float = 0.0

    def to_dict(self):
        return {"z_c": self.z_c, "A": self.A, "v": self.v, "M": self.M,
                "residual": self.residual, "tail_estimate": self.tail_estimate}


def _truncated_residual(model, M):
    def resid(z):
        with np.errstate(over="ignore", invalid="ignore"):
            total = float(model.g_at_zero(z, M)[1:].sum())
        return 1.0 - total
    return resid


def _shrink_to_finite(fn, z_from, z_to, max_steps=80):
    """Move z_from toward z_to until fn is finite there."""
    z = z_from
    val = fn(z)
    steps = 0
    while not np.isfinite(val) and steps < max_steps:
        z = 0.5 * (z + z_to)
        val = fn(z)
        steps += 1
    if not np.isfinite(val):
        raise NoRootError("residual is non-finite on the whole bracket")
    return z, val


def solve_zc(model, M=4096, tol=1e-10, alpha=0.1, pre_iterations=None):
    """Critical constants from the M-truncated fixed-point equation.

    The defining z_n iteration (capped at pre_iterations steps as a warm
    start) centres the bracket; scipy's brentq provides the bracketed
    root-finding with secant-type acceleration and bisection fallback.
    """
    if M < 1 or M > model.n_max:
        raise ValueError(f"M must lie in 1..n_max={model.n_max}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    pre = min(M, pre_iterations if pre_iterations is not None else 1024)
    try:
        z_start = float(z_sequence(model, pre).z_values[-1])
    except NonFiniteSequenceError:
        z_start = 1.0  # divergent warm start; bracket around unity instead
    if not np.isfinite(z_start):
        z_start = 1.0
    resid = _truncated_residual(model, M)

    lo_raw = max(1e-6, z_start - alpha)
    hi_raw = z_start + alpha
    lo, f_lo = _shrink_to_finite(resid, lo_raw, z_start)
    hi, f_hi = _shrink_to_finite(resid, hi_raw, z_start)
    if f_lo * f_hi > 0:
        # widen once before giving up
        warnings.warn("no sign change in the initial bracket; widening once")
        lo_raw = max(1e-6, z_start - 2 * alpha)
        hi_raw = z_start + 2 * alpha
        lo, f_lo = _shrink_to_finite(resid, lo_raw, z_start)
        hi, f_hi = _shrink_to_finite(resid, hi_raw, z_start)
    if f_lo * f_hi > 0:
        zs = np.linspace(lo, hi, 9)
        samples = ", ".join(f"F({zz:.6g})={resid(zz):.3g}" for zz in zs)
        raise NoRootError(f"no root in interval [{lo:.6g}, {hi:.6g}]: {samples}")

    if f_lo == 0.0:
        z_c = lo
    elif f_hi == 0.0:
        z_c = hi
    else:
        z_c = brentq(resid, lo, hi, xtol=1e-15, rtol=8.9e-16)
    residual = abs(resid(z_c))
    if residual > tol:
        raise NoRootError(
            f"root refinement stalled: residual {residual:.3g} > tol {tol:.3g}")

    g0 = model.g_at_zero(z_c, M)
    e0 = model.e_at_zero(z_c, M) if model.has_e else np.zeros(M + 1)
    gl0 = model.g_laplacian_block_at_zero(z_c, M)
    ms = np.arange(M + 1, dtype=float)
    weighted = float((ms * g0).sum())
    a_const = (1.0 + float(e0[1:].sum())) / weighted
    v_const = -float(gl0[1:].sum()) / (model.kernel.sigma2 * weighted)
    return CriticalConstants(z_c=float(z_c), A=a_const, v=v_const, M=M,
                             residual=float(residual),
                             tail_estimate=float(model.tail_weight(M)))
