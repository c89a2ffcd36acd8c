"""Torus integrals ||D_hat^2 f_m||_p with Haar-normalized measure dk/(2pi)^d.

Tensor midpoint grids (d <= 3) exploit the sign-flip symmetry of the
integrand to evaluate only the positive orthant; higher dimensions use
seeded uniform Monte Carlo with a deterministic pairwise mean, so the same
seed and sample count reproduce estimates bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NormEstimate",
    "DecayFit",
    "BudgetExceededError",
    "FitError",
    "lp_norm",
    "lp_norms",
    "decay_fit",
]


class BudgetExceededError(RuntimeError):
    """Requested resolution needs more integrand evaluations than allowed."""


class FitError(ValueError):
    """The norm sequence cannot support a log-log decay fit."""


@dataclass(frozen=True)
class NormEstimate:
    p: float
    m: int
    value: float
    std_error: float
    method: str
    sample_count: int
    seed: int | None = None


def _orthant_grid(d, n_per_axis):
    # even counts make the positive orthant mirror the full midpoint grid
    if n_per_axis % 2:
        raise ValueError("grid resolution must be even")
    c = -math.pi + 2 * math.pi * (np.arange(n_per_axis) + 0.5) / n_per_axis
    half = c[n_per_axis // 2:]
    mesh = np.meshgrid(*([half] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _integrand_rows(state, ks, m_values):
    """|D_hat(k)^2 f_m(k)| for each requested m (rows) over ks."""
    table = state.evaluate(ks)
    dhat2 = np.atleast_1d(state.model.kernel.fourier(ks)) ** 2
    return np.abs(table[list(m_values)]) * dhat2


def lp_norms(state, m_values, p, method="grid", resolution=256,
             mc_samples=None, seed=0, budget=10 ** 8):
    """Batch of NormEstimate for several m at one p; solves the table once."""
    if p < 1:
        raise ValueError("p must be at least 1")
    m_values = [int(m) for m in m_values]
    if any(m < 0 or m > state.horizon for m in m_values):
        raise ValueError("m out of the solved horizon")
    if getattr(state.model, "kernel", None) is None:
        raise ValueError("norms need a kernel-backed model (the integrand "
                         "weights by D_hat^2)")
    d = state.model.kernel.d

    if method == "grid":
        if d > 3:
            raise ValueError("tensor grids are limited to d <= 3; use monte_carlo")
        if resolution ** d > budget:
            raise BudgetExceededError(
                f"grid needs {resolution ** d} evaluations, budget {budget}")
        ks = _orthant_grid(d, resolution)
        rows = _integrand_rows(state, ks, m_values)
        means = (rows ** p).mean(axis=1)
        return [NormEstimate(p=p, m=m, value=float(mean ** (1.0 / p)),
                             std_error=0.0, method="grid",
                             sample_count=resolution ** d, seed=None)
                for m, mean in zip(m_values, means)]

    if method in ("mc", "monte_carlo"):
        ns = int(mc_samples if mc_samples is not None else 10 ** 5)
        if ns > budget:
            raise BudgetExceededError(f"{ns} samples exceed budget {budget}")
        rng = np.random.default_rng(seed)
        ks = rng.uniform(-math.pi, math.pi, size=(ns, d))
        rows = _integrand_rows(state, ks, m_values) ** p
        out = []
        for m, row in zip(m_values, rows):
            mean = float(row.mean())
            se_mean = float(row.std(ddof=1)) / math.sqrt(ns)
            value = mean ** (1.0 / p)
            # delta method: d(mean^(1/p))/dmean
            se_val = se_mean if p == 1 or mean == 0 else \
                se_mean * value / (p * mean)
            out.append(NormEstimate(p=p, m=m, value=value, std_error=se_val,
                                    method="monte_carlo", sample_count=ns,
                                    seed=int(seed)))
        return out

    raise ValueError(f"unknown method {method!r}")


def lp_norm(state, m, p, method="grid", resolution=256, mc_samples=None,
            seed=0, budget=10 ** 8):
    return lp_norms(state, [m], p, method=method, resolution=resolution,
                    mc_samples=mc_samples, seed=seed, budget=budget)[0]


@dataclass(frozen=True)
class DecayFit:
    slope: float
    log_amplitude: float
    reference_exponent: float | None
    deviation: float | None
    m_values: tuple


def decay_fit(norms, d=None, theta=None):
    """Least-squares slope of log value against log m.

    Needs at least 8 estimates spanning two dyadic octaves.  When the
    dimension is supplied the reference exponent -(d/(2p) ^ theta) and the
    fitted slope's deviation from it are reported.
    """
    norms = sorted(norms, key=lambda nrm: nrm.m)
    ms = np.array([nrm.m for nrm in norms], dtype=float)
    vals = np.array([nrm.value for nrm in norms])
    if len(ms) < 8:
        raise FitError("need at least 8 norm values for a decay fit")
    if ms.max() < 4 * ms.min():
        raise FitError("m values must span at least 2 dyadic octaves")
    if np.any(vals <= 0):
        raise FitError("nonpositive norm values cannot be log-fitted")
    slope, intercept = np.polyfit(np.log(ms), np.log(vals), 1)
    ref = None
    dev = None
    if d is not None:
        p = norms[0].p
        ref = -(d / (2.0 * p))
        if theta is not None:
            ref = -min(d / (2.0 * p), theta)
        dev = float(slope - ref)
    return DecayFit(slope=float(slope), log_amplitude=float(intercept),
                    reference_exponent=ref, deviation=dev,
                    m_values=tuple(int(m) for m in ms))
