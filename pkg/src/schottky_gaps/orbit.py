"""Orbit enumeration under the curvature norm ``||g||^2 = kappa(g(C_I))``.

The search tree is rooted at the base circle ``C_I``; a child prepends a letter
different from the word's initial letter.  Every step multiplies the curvature
by at least ``a > 1``, so a subtree is cut as soon as its root reaches ``T^2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import GroupConfig, step_ratio_bounds
from .errors import InvariantError
from .geometry import (TWO_PI, DiskMap, TangentCircle, Word, cartan_decompose, check_word,
                       curvature_via_cartan, reflect_tangent_scalar, word_to_map, wrap_angle)

Interval = Optional[tuple[float, float]]

COLLISION_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class OrbitPoint:
    word: Word
    circle: TangentCircle

    @property
    def norm_sq(self) -> float:
        return self.circle.kappa

    @property
    def theta(self) -> float:
        return self.circle.theta

    @property
    def length(self) -> int:
        return len(self.word)

    def map(self, cfg: GroupConfig) -> DiskMap:
        return word_to_map(cfg, self.word)


@dataclass(frozen=True)
class CountProfile:
    thresholds: tuple[float, ...]
    counts: tuple[int, ...]
    interval_counts: tuple[int, ...]
    interval: Interval = None


def word_tangent_circle(cfg: GroupConfig, word: Sequence[int]) -> TangentCircle:
    """``C_w = w(C_I)`` by successive reflection of the base circle (last letter first)."""
    w = check_word(word)
    th, ka = 0.0, 1.0 / cfg.r0
    for letter in reversed(w):
        c = cfg.circles[letter - 1]
        th, ka = reflect_tangent_scalar(c.center.real, c.center.imag, c.radius, th, ka)
    return TangentCircle(th, ka)


def in_interval(theta: float, interval: Interval) -> bool:
    """Membership in the counterclockwise half-open arc ``[start, end)``."""
    if interval is None:
        return True
    start, end = interval
    return wrap_angle(theta - start) < wrap_angle(end - start)


def _wrap_array(x: np.ndarray) -> np.ndarray:
    r = np.mod(x, TWO_PI)
    r[r >= TWO_PI] = 0.0
    return r


def _in_interval_array(theta: np.ndarray, interval: Interval) -> np.ndarray:
    if interval is None:
        return np.ones(theta.shape, dtype=bool)
    start, end = interval
    return _wrap_array(theta - start) < wrap_angle(end - start)


def interval_length(interval: Interval) -> float:
    if interval is None:
        return TWO_PI
    return wrap_angle(interval[1] - interval[0])


def _circle_params(cfg: GroupConfig) -> tuple[tuple[float, float, float], ...]:
    return tuple((c.center.real, c.center.imag, c.radius) for c in cfg.circles)


def _dfs(params, root: tuple[Word, float, float], T2: float, cap: int,
         interval: Interval) -> list[tuple[Word, float, float]]:
    out = []
    stack = [root]
    while stack:
        word, theta, kappa = stack.pop()
        if len(word) > cap:
            raise InvariantError(f"word {word} exceeds the depth cap {cap}")
        if in_interval(theta, interval):
            out.append((word, theta, kappa))
        first = word[0] if word else 0
        for letter in (3, 2, 1):
            if letter == first:
                continue
            cx, cy, R = params[letter - 1]
            th2, k2 = reflect_tangent_scalar(cx, cy, R, theta, kappa)
            if k2 < T2:
                stack.append(((letter,) + word, th2, k2))
    return out


def _dfs_job(args):
    return _dfs(*args)


def _check_collisions(points: Sequence[OrbitPoint], cyclic: bool) -> None:
    if len(points) < 2:
        return
    th = np.fromiter((p.theta for p in points), float, len(points))
    d = np.diff(th)
    if cyclic:
        d = np.append(d, th[0] + TWO_PI - th[-1])
    bad = np.flatnonzero(d < COLLISION_TOL)
    if bad.size:
        i = int(bad[0])
        raise InvariantError(f"orbit points {points[i].word} and {points[(i + 1) % len(points)].word} "
                             "collide on the boundary")


def enumerate_orbit(cfg: GroupConfig, T: float, interval: Interval = None,
                    workers: int = 1) -> list[OrbitPoint]:
    """All reduced words with ``||w|| < T`` whose tangency lies in ``interval``.

    The result is sorted counterclockwise by tangency angle.  With
    ``workers > 1`` independent subtrees are searched in separate processes;
    the merged output is identical to the serial one.
    """
    T2 = float(T) * float(T)
    base = 1.0 / cfg.r0
    if not base < T2:
        return []
    params = _circle_params(cfg)
    cap = cfg.depth_cap(T)
    if workers <= 1:
        raw = _dfs(params, ((), 0.0, base), T2, cap, interval)
    else:
        # emit the shallow levels here and hand each deeper subtree to a worker
        raw, roots, level = [], [((), 0.0, base)], 0
        while roots and len(roots) < 8 * workers and level < 6:
            nxt = []
            for word, theta, kappa in roots:
                if in_interval(theta, interval):
                    raw.append((word, theta, kappa))
                first = word[0] if word else 0
                for letter in (1, 2, 3):
                    if letter != first:
                        cx, cy, R = params[letter - 1]
                        th2, k2 = reflect_tangent_scalar(cx, cy, R, theta, kappa)
                        if k2 < T2:
                            nxt.append(((letter,) + word, th2, k2))
            roots, level = nxt, level + 1
        jobs = [(params, r, T2, cap, interval) for r in roots]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for part in ex.map(_dfs_job, jobs):
                raw.extend(part)
    raw.sort(key=lambda x: (x[1], x[0]))
    points = [OrbitPoint(w, TangentCircle(th, k)) for w, th, k in raw]
    _check_collisions(points, cyclic=interval is None)
    return points


def orbit_tangencies(cfg: GroupConfig, T: float, interval: Interval = None):
    """Vectorized level sweep returning sorted ``(theta, kappa, length)`` arrays.

    Produces the same point set as :func:`enumerate_orbit` without building
    word objects; intended for large ``T``.
    """
    T2 = float(T) * float(T)
    base = 1.0 / cfg.r0
    if not base < T2:
        empty = np.empty(0)
        return empty, empty, np.empty(0, dtype=np.int64)
    cap = cfg.depth_cap(T)
    th = np.array([0.0])
    ka = np.array([base])
    first = np.array([0], dtype=np.int8)
    out_th, out_ka, out_len = [th], [ka], [np.zeros(1, dtype=np.int64)]
    level = 0
    while th.size:
        level += 1
        if level > cap:
            raise InvariantError(f"level sweep exceeded the depth cap {cap}")
        nth, nka, nfirst = [], [], []
        ct, st = np.cos(th), np.sin(th)
        r = 1.0 / ka
        for letter, c in enumerate(cfg.circles, start=1):
            m = first != letter
            if not m.any():
                continue
            cx, cy, R = c.center.real, c.center.imag, c.radius
            rr, cc, ss, kk = r[m], ct[m], st[m], ka[m]
            px = (1.0 - rr) * cc - cx
            py = (1.0 - rr) * ss - cy
            L2 = px * px + py * py
            k2 = (L2 - rr * rr) / (R * R) * kk
            dx, dy = cc - cx, ss - cy
            f = R * R / (dx * dx + dy * dy)
            t2 = _wrap_array(np.arctan2(cy + f * dy, cx + f * dx))
            keep = k2 < T2
            nth.append(t2[keep])
            nka.append(k2[keep])
            nfirst.append(np.full(int(keep.sum()), letter, dtype=np.int8))
        th, ka, first = np.concatenate(nth), np.concatenate(nka), np.concatenate(nfirst)
        out_th.append(th)
        out_ka.append(ka)
        out_len.append(np.full(th.size, level, dtype=np.int64))
    th, ka, ln = np.concatenate(out_th), np.concatenate(out_ka), np.concatenate(out_len)
    if interval is not None:
        keep = _in_interval_array(th, interval)
        th, ka, ln = th[keep], ka[keep], ln[keep]
    order = np.argsort(th, kind="stable")
    return th[order], ka[order], ln[order]


def enumerate_by_depth(cfg: GroupConfig, depth: int) -> list[OrbitPoint]:
    """Every reduced word of length ``<= depth`` (no norm cutoff), sorted by tangency angle."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    params = _circle_params(cfg)
    level = [((), 0.0, 1.0 / cfg.r0)]
    raw = list(level)
    for _ in range(depth):
        nxt = []
        for word, theta, kappa in level:
            for letter in (1, 2, 3):
                if word and letter == word[0]:
                    continue
                cx, cy, R = params[letter - 1]
                th2, k2 = reflect_tangent_scalar(cx, cy, R, theta, kappa)
                nxt.append(((letter,) + word, th2, k2))
        raw.extend(nxt)
        level = nxt
    raw.sort(key=lambda x: (x[1], x[0]))
    return [OrbitPoint(w, TangentCircle(th, k)) for w, th, k in raw]


def word_length_bound(cfg: GroupConfig, T: float) -> int:
    """Longest possible word with norm below ``T``, from a rigorous step-ratio bound."""
    x = T * T * cfg.r0
    if x <= 1.0:
        return 0
    first, later = step_ratio_bounds(cfg)
    if x <= first:
        return 1
    return 1 + math.ceil(math.log(x / first) / math.log(later))


def enumerate_naive(cfg: GroupConfig, T: float, interval: Interval = None,
                    max_length: Optional[int] = None) -> list[OrbitPoint]:
    """Unpruned reference enumeration.

    Every reduced word up to ``max_length`` is built by right multiplication of
    SU(1,1) matrices; curvature comes from the Cartan formula and tangency
    from the exact boundary action.  Shares no code path with the tree search.
    """
    if max_length is None:
        max_length = word_length_bound(cfg, T)
    T2 = float(T) * float(T)
    r0 = cfg.r0
    gens = [c.matrix() for c in cfg.circles]
    out = []
    level = [((), np.eye(2, dtype=complex))]
    for length in range(max_length + 1):
        nxt = []
        for word, m in level:
            # C_I is symmetric under conjugation, so m acts on it directly
            cc = cartan_decompose(DiskMap(m, False))
            kappa = curvature_via_cartan(cc, 0.0, r0)
            theta = DiskMap(m, False).apply_boundary(0.0)
            if kappa < T2 and in_interval(theta, interval):
                out.append(OrbitPoint(word, TangentCircle(theta, kappa)))
            if length < max_length:
                last = word[-1] if word else 0
                odd = len(word) % 2 == 1
                for letter in (1, 2, 3):
                    if letter != last:
                        g = gens[letter - 1]
                        p = m @ (g.conj() if odd else g)
                        s = 1.0 / np.sqrt(abs(p[0, 0]) ** 2 - abs(p[0, 1]) ** 2)
                        nxt.append((word + (letter,), p * s))
        level = nxt
    out.sort(key=lambda p: (p.theta, p.word))
    return out


def count_profile(cfg: GroupConfig, T_grid: Sequence[float], interval: Interval = None) -> CountProfile:
    """Counts ``#{g : ||g|| < T}`` for every ``T`` in an increasing grid (one enumeration)."""
    grid = [float(t) for t in T_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("T grid must be strictly increasing")
    th, ka, _ = orbit_tangencies(cfg, grid[-1])
    ks = np.sort(ka)
    counts = tuple(int(np.searchsorted(ks, t * t, side="left")) for t in grid)
    if interval is None:
        icounts = counts
    else:
        sel = np.sort(ka[_in_interval_array(th, interval)])
        icounts = tuple(int(np.searchsorted(sel, t * t, side="left")) for t in grid)
    return CountProfile(tuple(grid), counts, icounts, interval)
