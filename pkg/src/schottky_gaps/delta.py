"""Two estimators of the critical exponent: count growth and a transfer-operator eigenvalue."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import GroupConfig
from .errors import InvariantError
from .orbit import CountProfile


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvariantError(f"delta estimate {self.delta} outside (0, 1)")


def fit_power_law(thresholds: Sequence[float], counts: Sequence[float]) -> tuple[float, float, np.ndarray]:
    """Least-squares slope and intercept of ``log N`` against ``log T``."""
    x = np.log(np.asarray(thresholds, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), y - (slope * x + intercept)


def estimate_delta_counting(profile: CountProfile, use_interval: bool = False) -> DeltaEstimate:
    """``delta = slope / 2`` of ``log N(T)`` vs ``log T`` over the upper half of the grid."""
    grid = np.asarray(profile.thresholds, dtype=float)
    counts = np.asarray(profile.interval_counts if use_interval else profile.counts, dtype=float)
    if len(grid) < 5:
        raise ValueError("need at least five grid points")
    if grid[-1] / grid[0] < 10.0:
        raise ValueError("grid must span at least one decade in T")
    upper = slice(len(grid) // 2, None)
    if np.any(counts[upper] <= 0):
        raise ValueError("zero counts in the fitted range")
    slope, intercept, resid = fit_power_law(grid[upper], counts[upper])
    return DeltaEstimate(slope / 2.0, "slope-fit", {
        "slope": slope, "intercept": intercept, "residuals": resid.tolist(),
        "thresholds": grid[upper].tolist(), "counts": counts[upper].tolist()})


def reduced_words(length: int) -> list[tuple[int, ...]]:
    words = [(i,) for i in (1, 2, 3)]
    for _ in range(length - 1):
        words = [w + (j,) for w in words for j in (1, 2, 3) if j != w[-1]]
    return words


def transfer_operator(cfg: GroupConfig, depth: int):
    """Sparse log-weights of the cylinder transfer matrix at a given depth.

    States are words ``w = s1..sk`` labelling the cylinder arc
    ``s1..s(k-1)(m_sk)``; ``x_w`` is the image of the midpoint of ``m_sk``.
    The transition ``w -> rho_j w`` (truncated to length k, ``j != s1``)
    carries weight ``|rho_j'(x_w)|^s``.  Returns ``(rows, cols, logw, n)``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    words = reduced_words(depth)
    index = {w: n for n, w in enumerate(words)}
    samples = []
    for w in words:
        t = cfg.arcs[w[-1] - 1][0]
        z = complex(math.cos(t), math.sin(t))
        for letter in reversed(w[:-1]):
            z = cfg.circles[letter - 1].reflect(z)
        samples.append(z / abs(z))
    rows, cols, logw = [], [], []
    for w, x in zip(words, samples):
        for j in (1, 2, 3):
            if j == w[0]:
                continue
            d = cfg.circles[j - 1].derivative_abs(x)
            if not d < 1.0:
                raise InvariantError("transition map is not a contraction at its sample point")
            rows.append(index[(j,) + w[:-1]])
            cols.append(index[w])
            logw.append(math.log(d))
    return np.array(rows), np.array(cols), np.array(logw), len(words)


def spectral_bounds(rows, cols, logw, n: int, s: float, x0=None, rtol: float = 1e-13,
                    max_iter: int = 10_000, stop_at: float | None = None):
    """Power iteration with Collatz-Wielandt bounds ``min (Ax)_i/x_i <= rho <= max (Ax)_i/x_i``.

    Stops when the bracket is relatively narrower than ``rtol`` or, if
    ``stop_at`` is given, as soon as the bracket excludes it.
    Returns ``(lower, upper, eigvec, iterations)``.
    """
    w = np.exp(s * logw)
    x = np.ones(n) if x0 is None else np.array(x0, dtype=float)
    for it in range(1, max_iter + 1):
        y = np.bincount(rows, weights=w * x[cols], minlength=n)
        ratio = y / x
        lo, hi = float(ratio.min()), float(ratio.max())
        x = y / y.sum()
        if hi - lo <= rtol * hi:
            return lo, hi, x, it
        if stop_at is not None and (lo > stop_at or hi < stop_at):
            return lo, hi, x, it
    raise InvariantError(f"power iteration did not converge in {max_iter} steps at s={s}")


def estimate_delta_eigenvalue(cfg: GroupConfig, depth: int = 6, tol: float = 1e-8,
                              max_iter: int = 10_000) -> DeltaEstimate:
    """Bisection for the exponent ``s`` where the transfer matrix has spectral radius 1."""
    rows, cols, logw, n = transfer_operator(cfg, depth)
    rho0, _, x, _ = spectral_bounds(rows, cols, logw, n, 0.0, max_iter=max_iter)
    lo_b, hi_b, _, _ = spectral_bounds(rows, cols, logw, n, 1.0, max_iter=max_iter)
    if not hi_b < 1.0:
        raise InvariantError("spectral radius at s=1 is not below 1")
    lo, hi = 0.0, 1.0
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r_lo, r_hi, x, it = spectral_bounds(rows, cols, logw, n, mid, x0=x, stop_at=1.0,
                                            max_iter=max_iter)
        steps += it
        if r_lo > 1.0:
            lo = mid
        elif r_hi < 1.0:
            hi = mid
        else:
            # bracket converged onto 1 within rtol
            lo = hi = mid
            break
    return DeltaEstimate(0.5 * (lo + hi), "eigenvalue", {
        "depth": depth, "states": n, "bracket": [lo, hi], "rho_at_0": rho0,
        "power_iterations": steps})


def delta_convergence(cfg: GroupConfig, depths: Sequence[int]) -> list[DeltaEstimate]:
    return [estimate_delta_eigenvalue(cfg, k) for k in depths]
