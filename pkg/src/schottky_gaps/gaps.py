"""Neighbor gaps of sorted tangencies, scaled empirical CDFs and histograms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvariantError
from .geometry import TWO_PI
from .orbit import CountProfile, Interval, OrbitPoint, interval_length


@dataclass(frozen=True)
class GapTable:
    points: np.ndarray
    gaps: np.ndarray
    scaled: np.ndarray
    T: float
    cyclic: bool
    interval: Interval = None
    words: Optional[tuple] = None

    @property
    def n_points(self) -> int:
        return len(self.points)


def compute_gaps(points, T: float, interval: Interval = None) -> GapTable:
    """Gaps between consecutive tangencies.

    ``points`` is a sequence of :class:`OrbitPoint` or of angles.  Without an
    interval the table is cyclic and includes the wraparound gap; with one it
    holds the ``n - 1`` interior gaps only.
    """
    words = None
    if len(points) and isinstance(points[0], OrbitPoint):
        words = tuple(p.word for p in points)
        th = np.array([p.theta for p in points], dtype=float)
    else:
        th = np.asarray(points, dtype=float)
    if th.size == 0:
        raise ValueError("no points to compute gaps from")
    if np.any(np.diff(th) < 0):
        order = np.argsort(th, kind="stable")
        th = th[order]
        if words is not None:
            words = tuple(words[i] for i in order)
    cyclic = interval is None
    if cyclic:
        gaps = np.append(np.diff(th), th[0] + TWO_PI - th[-1])
    else:
        if th.size < 2:
            raise ValueError("interval mode needs at least two points")
        gaps = np.diff(th)
    if np.any(gaps <= 0):
        raise InvariantError("non-positive gap between sorted tangencies")
    if cyclic and abs(gaps.sum() - TWO_PI) > 1e-9:
        raise InvariantError("cyclic gaps do not sum to 2*pi")
    if not cyclic and gaps.sum() > interval_length(interval) + 1e-12:
        raise InvariantError("interval gaps exceed the interval length")
    T2 = float(T) * float(T)
    return GapTable(th, gaps, gaps * T2, float(T), cyclic, interval, words)


class Ecdf:
    """Right-continuous step function ``s -> #{values <= s} / normalizer``."""

    def __init__(self, values, normalizer: Optional[float] = None):
        self.values = np.sort(np.asarray(values, dtype=float))
        self.normalizer = float(len(self.values) if normalizer is None else normalizer)
        if not self.normalizer > 0:
            raise ValueError("normalizer must be positive")

    def __call__(self, s):
        return np.searchsorted(self.values, s, side="right") / self.normalizer

    def __len__(self):
        return len(self.values)

    @property
    def total(self) -> float:
        return len(self.values) / self.normalizer

    def histogram(self, bin_width: float = 0.2, s_max: Optional[float] = None):
        """Bin edges and densities (counts / (normalizer * bin_width))."""
        if s_max is None:
            s_max = float(self.values[-1]) if len(self.values) else bin_width
        nbins = max(1, int(np.ceil(s_max / bin_width)))
        edges = np.arange(nbins + 1) * bin_width
        counts, _ = np.histogram(self.values, bins=edges)
        return edges, counts / (self.normalizer * bin_width)

    def sup_distance(self, other: "Ecdf") -> float:
        """Exact sup-norm distance; both are constant between the union of jumps."""
        pts = np.concatenate([self.values, other.values, [-np.inf]])
        return float(np.max(np.abs(self(pts) - other(pts))))


def gap_cdf(table: GapTable, normalizer: Optional[float] = None) -> Ecdf:
    """Scaled gap CDF. The default normalizer is the number of points in the table."""
    return Ecdf(table.scaled, table.n_points if normalizer is None else normalizer)


def power_law_normalizer(profile: CountProfile, delta: float, T: float,
                         use_interval: bool = True) -> float:
    """``c0 mu(I) T^{2 delta}`` with ``c0 mu(I)`` fitted over the upper half of a count profile."""
    grid = np.asarray(profile.thresholds)
    counts = np.asarray(profile.interval_counts if use_interval else profile.counts, dtype=float)
    upper = slice(len(grid) // 2, None)
    c = float(np.mean(counts[upper] / grid[upper] ** (2 * delta)))
    return c * float(T) ** (2 * delta)


def cdf_table(ecdf: Ecdf, s_grid: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s_grid, dtype=float)
    return s, ecdf(s)


def default_s_grid(s_max: float = 1e5, n: int = 2001) -> np.ndarray:
    """Grid for tabulating a gap CDF: 0 followed by log-spaced points up to ``s_max``."""
    return np.concatenate([[0.0], np.geomspace(1e-2, s_max, n - 1)])
