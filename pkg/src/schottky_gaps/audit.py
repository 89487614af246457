"""Numerical audits of the structural estimates behind the gap-distribution argument.

Each audit returns an :class:`AuditReport` whose pass flag is computed only
from the recorded criteria, so a stored report can be re-judged offline.
Norms are compared squared (curvatures), since the per-letter bounds ``a``
and ``b`` are curvature ratios.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import GroupConfig
from .geometry import (DiskMap, Word, cartan_decompose, cartan_reconstruct, check_word,
                       curvature_via_cartan, reflect_tangent_scalar, word_to_map, wrap_angle)
from .orbit import OrbitPoint, enumerate_orbit, word_tangent_circle

N1_DEFAULT = 2

_OPS = {"<=": operator.le, "<": operator.lt, ">=": operator.ge, ">": operator.gt, "==": operator.eq}


@dataclass(frozen=True)
class Criterion:
    name: str
    value: float
    op: str
    bound: float

    @property
    def ok(self) -> bool:
        return bool(_OPS[self.op](self.value, self.bound))

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "op": self.op, "bound": self.bound,
                "ok": self.ok}


@dataclass(frozen=True)
class AuditReport:
    name: str
    stats: dict
    criteria: tuple[Criterion, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.criteria)

    def criterion(self, name: str) -> Criterion:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "stats": self.stats,
                "criteria": [c.to_dict() for c in self.criteria]}


def reduced_words_upto(max_len: int, even_only: bool = False) -> list[Word]:
    """All reduced words of length ``<= max_len`` including the empty word, shortlex order."""
    out: list[Word] = [()]
    level: list[Word] = [()]
    for _ in range(max_len):
        level = [w + (j,) for w in level for j in (1, 2, 3) if not w or j != w[-1]]
        out.extend(level)
    if even_only:
        out = [w for w in out if len(w) % 2 == 0]
    return out


def random_reduced_word(rng: np.random.Generator, length: int, avoid_first: int = 0,
                        avoid_last: int = 0) -> Word:
    """Uniform reduced word with ``w[0] != avoid_first`` and ``w[-1] != avoid_last``."""
    while True:
        w: list[int] = []
        prev = avoid_first
        for _ in range(length):
            choices = [x for x in (1, 2, 3) if x != prev]
            prev = choices[int(rng.integers(len(choices)))]
            w.append(prev)
        if not w or w[-1] != avoid_last:
            return tuple(w)


def norm_sq(cfg: GroupConfig, word: Sequence[int]) -> float:
    """``||w||^2``, the curvature of ``w(C_I)``."""
    return word_tangent_circle(cfg, word).kappa


def _log_slope(x: np.ndarray, y: np.ndarray) -> float:
    if np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, np.log(y), 1)[0])


# ---------------------------------------------------------------- step ratios

def audit_step_ratios(cfg: GroupConfig, depth: int = 10) -> AuditReport:
    """Every parent-to-child curvature ratio in the tree to ``depth`` lies in ``[a, b]``."""
    if depth < 3:
        raise ValueError("depth must be at least 3")
    level = [(0, 0.0, 1.0 / cfg.r0)]
    lo, hi, n = math.inf, -math.inf, 0
    per_depth = []
    for _ in range(depth):
        nxt = []
        dlo, dhi = math.inf, -math.inf
        for first, th, ka in level:
            for letter in (1, 2, 3):
                if letter == first:
                    continue
                c = cfg.circles[letter - 1]
                th2, k2 = reflect_tangent_scalar(c.center.real, c.center.imag, c.radius, th, ka)
                r = k2 / ka
                dlo, dhi = min(dlo, r), max(dhi, r)
                nxt.append((letter, th2, k2))
        n += len(nxt)
        per_depth.append([dlo, dhi])
        lo, hi = min(lo, dlo), max(hi, dhi)
        level = nxt
    stats = {"depth": depth, "pairs": n, "min_ratio": lo, "max_ratio": hi, "a": cfg.a, "b": cfg.b,
             "per_depth": per_depth}
    return AuditReport("step_ratios", stats, (
        Criterion("min_ratio >= a", lo, ">=", cfg.a),
        Criterion("max_ratio <= b", hi, "<=", cfg.b),
        Criterion("min_ratio > 1", lo, ">", 1.0)))


# ---------------------------------------------------------------- norm equivalence

def audit_norm_equivalence(cfg: GroupConfig, max_len: int = 12, band_bound: float = 1e3,
                           slope_bound: float = 0.02) -> AuditReport:
    """``kappa(C_g) / (|xi|^2 + |eta|^2)`` over all even words: bounded band and no length trend."""
    if max_len < 4:
        raise ValueError("max_len must be at least 4")
    words = reduced_words_upto(max_len, even_only=True)
    ratios = np.empty(len(words))
    lengths = np.array([len(w) for w in words], dtype=float)
    for n, w in enumerate(words):
        ratios[n] = norm_sq(cfg, w) / word_to_map(cfg, w).frobenius_sq()
    band = float(ratios.max() / ratios.min())
    slope = _log_slope(lengths, ratios)
    stats = {"max_len": max_len, "words": len(words), "min_ratio": float(ratios.min()),
             "max_ratio": float(ratios.max()), "band": band, "log_ratio_slope": slope}
    return AuditReport("norm_equivalence", stats, (
        Criterion("max/min ratio <= bound", band, "<=", band_bound),
        Criterion("|log-ratio slope in length| <= bound", abs(slope), "<=", slope_bound)))


def audit_cartan_curvature(cfg: GroupConfig, max_len: int = 12, rtol: float = 1e-9) -> AuditReport:
    """Cartan-coordinate curvature of ``g(C_I)`` against successive reflection, all even words."""
    words = reduced_words_upto(max_len, even_only=True)
    worst, worst_word = 0.0, ()
    for w in words:
        geometric = norm_sq(cfg, w)
        cartan = curvature_via_cartan(cartan_decompose(word_to_map(cfg, w)), 0.0, cfg.r0)
        err = abs(cartan - geometric) / geometric
        if err > worst:
            worst, worst_word = err, w
    stats = {"max_len": max_len, "words": len(words), "max_rel_err": worst,
             "worst_word": list(worst_word)}
    return AuditReport("cartan_curvature", stats, (
        Criterion("max relative error <= rtol", worst, "<=", rtol),))


# ---------------------------------------------------------------- extension bounds

def audit_extension_bounds(cfg: GroupConfig, n: int = 4, samples: int = 500, seed: int = 0,
                           max_gamma_len: int = 10, slack_bound: float = 10.0,
                           sym_rtol: float = 1e-9) -> AuditReport:
    """``||w gamma||^2 / ||gamma||^2`` in ``[a^n, b^n]`` up to a recorded slack, ``l(w) = n``.

    ``w gamma`` is reduced when ``End(w) != Int(gamma)``.  The right
    extension ``gamma w`` is compared through Frobenius norms, which are
    invariant under inversion: ``(gamma w)^{-1}`` is the reversed word.
    """
    if n < 1:
        raise ValueError("window length must be at least 1")
    rng = np.random.default_rng(seed)
    left = np.empty(samples)
    right = np.empty(samples)
    sym_err = 0.0
    for s in range(samples):
        glen = int(rng.integers(0, max_gamma_len + 1))
        gamma = random_reduced_word(rng, glen)
        w = random_reduced_word(rng, n, avoid_last=gamma[0] if gamma else 0)
        left[s] = norm_sq(cfg, w + gamma) / norm_sq(cfg, gamma)
        w2 = random_reduced_word(rng, n, avoid_first=gamma[-1] if gamma else 0)
        gw = word_to_map(cfg, gamma + w2).frobenius_sq()
        rev = word_to_map(cfg, tuple(reversed(gamma + w2))).frobenius_sq()
        sym_err = max(sym_err, abs(gw - rev) / gw)
        right[s] = gw / word_to_map(cfg, gamma).frobenius_sq()
    lo_bound, hi_bound = cfg.a**n, cfg.b**n
    slack = float(max(1.0, lo_bound / left.min(), left.max() / hi_bound))
    stats = {"n": n, "samples": samples, "left_min": float(left.min()), "left_max": float(left.max()),
             "a^n": lo_bound, "b^n": hi_bound, "slack": slack,
             "right_frobenius_min": float(right.min()), "right_frobenius_max": float(right.max()),
             "frobenius_symmetry_err": sym_err}
    return AuditReport("extension_bounds", stats, (
        Criterion("slack <= bound", slack, "<=", slack_bound),
        Criterion("Frobenius symmetry rel err <= tol", sym_err, "<=", sym_rtol)))


# ---------------------------------------------------------------- palindromic tails

def audit_palindrome_tails(cfg: GroupConfig, n_max: int = 8, samples: int = 200, seed: int = 0,
                           max_gamma_len: int = 8, widen_bound: float = 2.0) -> AuditReport:
    """``||gamma (jk)^n|| / ||gamma (kj)^n||`` for ``End(gamma) = i``; the band must not widen in n.

    The same sample of ``gamma`` is reused for every ``n``; the band at ``n``
    is the max/min of the ratio over the sample.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    rng = np.random.default_rng(seed)
    gammas = [random_reduced_word(rng, int(rng.integers(1, max_gamma_len + 1))) for _ in range(samples)]
    bands = {}
    for n in range(0, n_max + 1):
        r = np.empty(samples)
        for s, g in enumerate(gammas):
            i = g[-1]
            j, k = (x for x in (1, 2, 3) if x != i)
            r[s] = math.sqrt(norm_sq(cfg, g + (j, k) * n) / norm_sq(cfg, g + (k, j) * n))
        bands[n] = [float(r.min()), float(r.max())]
    width = {n: b[1] / b[0] for n, b in bands.items()}
    widen = width[n_max] / width[2]
    stats = {"n_max": n_max, "samples": samples, "bands": {str(n): b for n, b in bands.items()},
             "band_width": {str(n): w for n, w in width.items()}, "widening": widen}
    return AuditReport("palindrome_tails", stats, (
        Criterion("band(n=0) == 1", width[0], "==", 1.0),
        Criterion("band(n_max) <= 2 band(2)", widen, "<=", widen_bound)))


# ---------------------------------------------------------------- tail classification

@dataclass(frozen=True)
class TailClass:
    """``word = gamma_prefix . (j k)^n . w`` with ``End(gamma_prefix) = i`` and ``Int(w) != k``."""

    i: int
    j: int
    k: int
    n: int
    w: Word
    gamma_prefix: Word

    def reassemble(self) -> Word:
        return self.gamma_prefix + (self.j, self.k) * self.n + self.w


def _two_letter_suffix(u: Word) -> int:
    """Length of the longest suffix of a reduced word using at most two letters."""
    if len(u) <= 2:
        return len(u)
    letters = {u[-1], u[-2]}
    m = 2
    while m < len(u) and u[-m - 1] in letters:
        m += 1
    return m


def classify_tail(word: Sequence[int], N1: int = N1_DEFAULT) -> Optional[TailClass]:
    """Tail class of a reduced word, or ``None`` for a sporadic word.

    Tries windows ``l(w) = N1`` and ``N1 + 1``; the alternating run before the
    window is the longest two-letter suffix of the remainder, which must have
    even length and leave a nonempty prefix.  The larger ``n`` wins, ties go
    to ``l(w) = N1``.  Words of length ``<= N1`` and words whose remainder is
    a pure two-letter run are sporadic.
    """
    word = check_word(word)
    if N1 < 1:
        raise ValueError("window length must be at least 1")
    if len(word) <= N1:
        return None
    best = None
    for m in (N1, N1 + 1):
        if len(word) <= m:
            continue
        u = word[:len(word) - m]
        run = _two_letter_suffix(u)
        if run % 2 or run >= len(u) or run == 0:
            continue
        n = run // 2
        if best is None or n > best.n:
            prefix = u[:len(u) - run]
            j, k = u[len(u) - run], u[len(u) - run + 1]
            best = TailClass(prefix[-1], j, k, n, word[len(word) - m:], prefix)
    return best


def audit_tail_partition(max_len: int = 12, N1: int = N1_DEFAULT) -> AuditReport:
    """Every non-sporadic reduced word to ``max_len`` gets exactly one valid class."""
    words = reduced_words_upto(max_len)
    violations, sporadic, classified = 0, 0, 0
    per_class: dict[str, int] = {}
    for word in words:
        tc = classify_tail(word, N1)
        if tc is None:
            sporadic += 1
            continue
        classified += 1
        ok = (tc.reassemble() == word and len({tc.i, tc.j, tc.k}) == 3 and tc.n >= 1
              and len(tc.w) in (N1, N1 + 1) and tc.w[0] != tc.k
              and (not tc.gamma_prefix or tc.gamma_prefix[-1] == tc.i))
        violations += not ok
        key = f"{tc.i}{tc.j}{tc.k}"
        per_class[key] = per_class.get(key, 0) + 1
    stats = {"max_len": max_len, "N1": N1, "words": len(words), "classified": classified,
             "sporadic": sporadic, "per_class": per_class, "violations": violations}
    return AuditReport("tail_partition", stats, (
        Criterion("violations == 0", violations, "==", 0),
        Criterion("classified + sporadic == words", classified + sporadic, "==", len(words))))


# ---------------------------------------------------------------- neighbors

def neighbor_ratios(points: Sequence[OrbitPoint], cyclic: bool = True) -> np.ndarray:
    """``max/min`` of the norms of each adjacent pair (always >= 1)."""
    norms = np.sqrt(np.array([p.norm_sq for p in points]))
    a, b = norms[:-1], norms[1:]
    if cyclic:
        a, b = np.append(a, norms[-1]), np.append(b, norms[0])
    return np.maximum(a, b) / np.minimum(a, b)


def shares_tail_prefix(w1: Word, w2: Word, N1: int = N1_DEFAULT) -> bool:
    """Whether one word extends the tail-class prefix of the other."""
    for x, y in ((w1, w2), (w2, w1)):
        tc = classify_tail(x, N1)
        if tc is not None and y[:len(tc.gamma_prefix)] == tc.gamma_prefix:
            return True
    return False


def audit_neighbors(cfg: GroupConfig, T_low: float = 500.0, T_high: float = 1000.0,
                    N1: int = N1_DEFAULT, samples: int = 200, seed: int = 0,
                    stability: float = 0.2, share_bound: float = 0.95) -> AuditReport:
    """Neighbor norm ratios stay bounded in T; dense-part neighbors share a tail prefix.

    The dense part is the set of gaps with scaled length at most the median.
    """
    from .gaps import compute_gaps

    out = {}
    pairs_high = None
    for T in (T_low, T_high):
        pts = enumerate_orbit(cfg, T)
        if len(pts) < 100:
            raise ValueError(f"need at least 100 gaps, got {len(pts)} at T={T}")
        r = neighbor_ratios(pts)
        out[T] = {"points": len(pts), "max_ratio": float(r.max()),
                  "median_ratio": float(np.median(r))}
        pairs_high = (pts, compute_gaps(pts, T))
    pts, table = pairs_high
    dense = np.flatnonzero(table.scaled <= np.median(table.scaled))
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(dense, size=min(samples, dense.size), replace=False))
    flagged = []
    for idx in pick:
        w1, w2 = pts[idx].word, pts[(idx + 1) % len(pts)].word
        if not shares_tail_prefix(w1, w2, N1):
            flagged.append([list(w1), list(w2)])
    share = 1.0 - len(flagged) / len(pick)
    change = abs(out[T_high]["max_ratio"] / out[T_low]["max_ratio"] - 1.0)
    stats = {"N1": N1, "per_T": {str(k): v for k, v in out.items()}, "max_ratio_change": change,
             "sampled_pairs": int(len(pick)), "prefix_share_fraction": share,
             "flagged_pairs": flagged}
    return AuditReport("neighbors", stats, (
        Criterion("max-ratio change between T values < bound", change, "<", stability),
        Criterion("prefix-sharing fraction >= bound", share, ">=", share_bound)))


# ---------------------------------------------------------------- distance asymptotic

def _boundary_angle(cfg: GroupConfig, word: Word) -> float:
    return word_to_map(cfg, word).apply_boundary(0.0) if word else 0.0


def tan_difference_distance(t: float, phi2: float, theta1: float, theta2: float) -> float:
    """``2 e^{-t} |tan((pi - phi2 + theta1)/2) - tan((pi - phi2 + theta2)/2)|``."""
    x1 = math.tan(0.5 * (math.pi - phi2 + theta1))
    x2 = math.tan(0.5 * (math.pi - phi2 + theta2))
    return 2.0 * math.exp(-t) * abs(x1 - x2)


def _near_pole(arg: float, margin: float) -> bool:
    # distance from arg to the nearest odd multiple of pi/2
    d = (arg - 0.5 * math.pi) % math.pi
    return min(d, math.pi - d) < margin


def audit_distance_asymptotic(cfg: GroupConfig, t_min: float = 15.0, samples: int = 200,
                              seed: int = 0, max_tail: int = 4, rtol: float = 1e-3,
                              decay_t: float = 4.0, pole_margin: float = 0.1) -> AuditReport:
    """Exact image distance ``d(g v(1), g v'(1))`` against the tan-difference form.

    ``g`` runs over random even words with ``t(g) >= t_min``.  Decay is
    measured on the Cartan family ``k(phi1) a(t) k(pi - phi2)`` of each sample
    at ``decay_t`` and ``decay_t + 2``: the distance shrinks by ``e^{-2}`` and
    the relative error of the tan form by ``e^{-4}`` (its leading term is
    ``e^{-2t} (X1^2 + X1 X2 + X2^2) / 3`` with ``X = tan``).
    """
    if t_min < 10.0:
        raise ValueError("t_min must be at least 10")
    rng = np.random.default_rng(seed)
    rel, dist_ratio, err_ratio = [], [], []
    skipped = 0
    while len(rel) < samples:
        word: list[int] = []
        g = DiskMap.identity()
        while True:
            nxt = [x for x in (1, 2, 3) if not word or x != word[-1]]
            letter = nxt[int(rng.integers(len(nxt)))]
            word.append(letter)
            g = g.compose(DiskMap(cfg.circles[letter - 1].matrix(), True))
            if len(word) % 2 == 0 and 2.0 * math.asinh(abs(g.eta)) >= t_min:
                break
        cc = cartan_decompose(g)
        v1 = random_reduced_word(rng, int(rng.integers(0, max_tail + 1)), avoid_first=word[-1])
        v2 = random_reduced_word(rng, int(rng.integers(1, max_tail + 1)), avoid_first=word[-1])
        if v1 == v2:
            continue
        th1, th2 = _boundary_angle(cfg, v1), _boundary_angle(cfg, v2)
        if any(_near_pole(0.5 * (math.pi - cc.phi2 + th), pole_margin) for th in (th1, th2)):
            skipped += 1
            continue
        exact = g.boundary_distance(th1, th2)
        approx = tan_difference_distance(cc.t, cc.phi2, th1, th2)
        rel.append(abs(exact - approx) / exact)
        d_e, e_e = [], []
        for t in (decay_t, decay_t + 2.0):
            h = DiskMap(cartan_reconstruct(type(cc)(cc.phi1, t, cc.phi2)), False)
            ex = h.boundary_distance(th1, th2)
            d_e.append(ex)
            e_e.append(abs(ex - tan_difference_distance(t, cc.phi2, th1, th2)) / ex)
        dist_ratio.append(d_e[1] / d_e[0])
        err_ratio.append(e_e[1] / e_e[0])
    rel_a = np.array(rel)
    dr = float(np.median(dist_ratio))
    er = float(np.median(err_ratio))
    e2, e4 = math.exp(-2.0), math.exp(-4.0)
    stats = {"t_min": t_min, "samples": samples, "skipped_near_pole": skipped,
             "max_rel_err": float(rel_a.max()), "median_rel_err": float(np.median(rel_a)),
             "decay_t": decay_t, "median_distance_ratio": dr, "median_error_ratio": er,
             "expected_distance_ratio": e2, "expected_error_ratio": e4}
    return AuditReport("distance_asymptotic", stats, (
        Criterion("max relative error <= rtol", float(rel_a.max()), "<=", rtol),
        Criterion("distance ratio / e^-2 <= 3", dr / e2, "<=", 3.0),
        Criterion("distance ratio / e^-2 >= 1/3", dr / e2, ">=", 1.0 / 3.0),
        Criterion("error ratio <= 3 e^-2", er, "<=", 3.0 * e2),
        Criterion("error ratio / e^-4 <= 3", er / e4, "<=", 3.0),
        Criterion("error ratio / e^-4 >= 1/3", er / e4, ">=", 1.0 / 3.0)))


def run_all(cfg: GroupConfig, N1: int = N1_DEFAULT, seed: int = 0) -> list[AuditReport]:
    return [audit_step_ratios(cfg, 10), audit_norm_equivalence(cfg, 12), audit_cartan_curvature(cfg, 12),
            audit_extension_bounds(cfg, 4, seed=seed), audit_palindrome_tails(cfg, 8, seed=seed),
            audit_tail_partition(12, N1), audit_neighbors(cfg, N1=N1, seed=seed),
            audit_distance_asymptotic(cfg, seed=seed)]
