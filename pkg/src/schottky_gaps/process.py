"""i.i.d. points drawn from the approximate limit-set measure and their nearest-gap statistics.

The conformal measure on the limit set is approximated by the normalized
counting measure on the orbit tangencies at a large threshold ``T``.
Randomness comes from numpy's PCG64; trial ``k`` of a run with seed ``s``
uses the ``k``-th child of ``SeedSequence(s)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import GroupConfig
from .errors import GuardError
from .gaps import Ecdf
from .geometry import TWO_PI
from .orbit import orbit_tangencies

TIE_RESOLUTION = 1e-14
MAX_BONFERRONI_N = 400
MAX_BONFERRONI_ORDER = 3


@dataclass(frozen=True)
class TangencyMeasure:
    """Uniform probability on a sorted set of distinct boundary angles."""

    angles: np.ndarray
    T: float

    def __post_init__(self):
        if self.angles.size == 0:
            raise ValueError("empty tangency set")
        if np.any(np.diff(self.angles) <= 0):
            raise ValueError("angles must be strictly increasing")

    @classmethod
    def from_config(cls, cfg: GroupConfig, T: float) -> "TangencyMeasure":
        th, _, _ = orbit_tangencies(cfg, T)
        return cls(th, float(T))

    @property
    def size(self) -> int:
        return int(self.angles.size)

    @property
    def resolution(self) -> float:
        """Mean orbit-point spacing scale ``2 pi / T^2``."""
        return TWO_PI / (self.T * self.T)

    def count_ccw(self, x, eta) -> np.ndarray:
        """``#{y != x : 0 < ccw(x, y) <= eta}``; the whole set when ``eta >= 2 pi``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        eta = np.broadcast_to(np.asarray(eta, dtype=float), x.shape)
        a = self.angles
        start = np.searchsorted(a, x, side="right")
        hi = x + eta
        wrap = hi >= TWO_PI
        end = np.where(wrap, np.searchsorted(a, hi - TWO_PI, side="right") + a.size,
                       np.searchsorted(a, hi, side="right"))
        out = end - start
        return np.where(eta >= TWO_PI, a.size, out)

    def mass(self, x, eta) -> np.ndarray:
        """``mu(L(x, eta))`` with ``L(x, eta) = (x, x + eta]`` counterclockwise."""
        return self.count_ccw(x, eta) / self.size


@dataclass(frozen=True)
class ShadowEstimate:
    x: float
    eta: float
    mu_mass: float
    p: float


def shadow_ratio(measure: TangencyMeasure, x: float, eta: float, delta: float) -> ShadowEstimate:
    """``p(x, eta) = mu(L(x, eta)) / eta^delta``."""
    if not measure.resolution < eta <= TWO_PI:
        raise ValueError(f"eta = {eta} must lie in ({measure.resolution}, 2 pi]")
    m = float(measure.mass(x, eta)[0])
    return ShadowEstimate(float(x), float(eta), m, m / eta**delta)


def check_guards(measure: TangencyMeasure, N: int, delta: float) -> None:
    if N < 1:
        raise GuardError("N must be positive")
    if N * 5 > measure.size:
        raise GuardError(f"N = {N} exceeds a fifth of the {measure.size} tangencies "
                         f"(ratio {N / measure.size:.4g} > 0.2)")
    scale = N ** (-1.0 / delta)
    need = 50.0 * measure.resolution
    if scale < need:
        raise GuardError(f"sample scale N^(-1/delta) = {scale:.4g} is below 50 * 2pi/T^2 = {need:.4g} "
                         f"(ratio {scale / need:.4g} < 1)")


def draw_tangencies(measure: TangencyMeasure, n: int, rng: np.random.Generator,
                    distinct: bool = True) -> np.ndarray:
    """``n`` uniform draws; with ``distinct``, draws closer than the tie resolution are redrawn."""
    angles = measure.angles[rng.integers(measure.size, size=n)]
    if not distinct or n < 2:
        return angles
    if n > measure.size:
        raise GuardError("cannot draw more distinct points than tangencies")
    while True:
        order = np.argsort(angles, kind="stable")
        s = angles[order]
        gaps = np.append(np.diff(s), s[0] + TWO_PI - s[-1])
        # the later element of each tie is redrawn
        dup = order[(np.flatnonzero(gaps < TIE_RESOLUTION) + 1) % n]
        if dup.size == 0:
            return angles
        dup = np.unique(dup)
        angles[dup] = measure.angles[rng.integers(measure.size, size=dup.size)]


def sample_mu(measure: TangencyMeasure, N: int, seed, delta: float) -> np.ndarray:
    """``N`` distinct draws from the tangency measure after the size and scale guards."""
    check_guards(measure, N, delta)
    rng = np.random.default_rng(seed)
    return draw_tangencies(measure, N, rng)


def nearest_distances(samples, symmetric: bool = False) -> np.ndarray:
    """``d_i = min_{j != i} ccw(P_i, P_j)``; with ``symmetric`` both directions count.

    Returned in the order of ``samples``.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points")
    order = np.argsort(x, kind="stable")
    s = x[order]
    succ = np.append(np.diff(s), s[0] + TWO_PI - s[-1])
    d = succ
    if symmetric:
        d = np.minimum(succ, np.roll(succ, 1))
    out = np.empty_like(d)
    out[order] = d
    return out


def nearest_gap_cdf(samples, delta: float, symmetric: bool = False) -> Ecdf:
    """Empirical ``nu_N``: distribution of ``d_i N^{1/delta}``."""
    n = len(samples)
    return Ecdf(nearest_distances(samples, symmetric) * n ** (1.0 / delta))


@dataclass(frozen=True)
class ProcessRun:
    seed: int
    N: int
    delta: float
    trials: int
    samples: np.ndarray
    scaled: np.ndarray
    symmetric: bool = False

    @property
    def nu(self) -> Ecdf:
        """Pooled ``nu_N`` over trials (equal to the trial mean, since every trial has N points)."""
        return Ecdf(self.scaled.ravel())

    def trial_nu(self, k: int) -> Ecdf:
        return Ecdf(self.scaled[k])


def _trial(args):
    measure, N, child, delta, symmetric = args
    rng = np.random.default_rng(child)
    x = draw_tangencies(measure, N, rng)
    return x, nearest_distances(x, symmetric) * N ** (1.0 / delta)


def simulate(measure: TangencyMeasure, N: int, delta: float, trials: int = 1, seed: int = 0,
             symmetric: bool = False, workers: int = 1) -> ProcessRun:
    """Independent trials with per-trial child seeds; output independent of ``workers``."""
    check_guards(measure, N, delta)
    if N < 2:
        raise ValueError("need N >= 2 for nearest gaps")
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(measure, N, c, delta, symmetric) for c in children]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            res = list(ex.map(_trial, jobs))
    else:
        res = [_trial(j) for j in jobs]
    samples = np.stack([r[0] for r in res])
    scaled = np.stack([r[1] for r in res])
    return ProcessRun(int(seed), N, float(delta), trials, samples, scaled, symmetric)


@dataclass(frozen=True)
class ZnComparison:
    s: np.ndarray
    nu: np.ndarray
    one_minus_z: np.ndarray
    sup_discrepancy: float
    n_x: int


def zn_curve(measure: TangencyMeasure, N: int, delta: float, s_grid, n_x: int = 2000,
             seed: int = 0) -> np.ndarray:
    """``Z_N(s) = E_x exp(-s^delta p(x, s N^{-1/delta}))``; note ``s^delta p = N mu(L)``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    x = measure.angles[rng.integers(measure.size, size=n_x)]
    s = np.asarray(s_grid, dtype=float)
    scale = N ** (-1.0 / delta)
    z = np.empty(s.size)
    for n, si in enumerate(s):
        m = measure.mass(x, si * scale)
        z[n] = float(np.mean(np.exp(-N * m)))
    return z


def zn_compare(run: ProcessRun, measure: TangencyMeasure, s_grid, n_x: int = 2000,
               seed: Optional[int] = None) -> ZnComparison:
    """Sup over ``s_grid`` of ``|mean nu_N([0, s]) - (1 - Z_N(s))|``."""
    check_guards(measure, run.N, run.delta)
    s = np.asarray(s_grid, dtype=float)
    nu = run.nu(s)
    z = zn_curve(measure, run.N, run.delta, s, n_x, run.seed + 1 if seed is None else seed)
    one_minus = 1.0 - z
    return ZnComparison(s, nu, one_minus, float(np.max(np.abs(nu - one_minus))), n_x)


@dataclass(frozen=True)
class BonferroniReport:
    s: float
    n_max: int
    trials: int
    violations: int
    A: np.ndarray
    nu: np.ndarray
    ea1_mean: float
    ea1_se: float
    ea1_formula: float
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def brackets_hold(self) -> bool:
        return self.violations == 0

    @property
    def ea1_z(self) -> float:
        diff = abs(self.ea1_mean - self.ea1_formula)
        if self.ea1_se == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / self.ea1_se

    def to_dict(self) -> dict:
        return {"s": self.s, "n_max": self.n_max, "trials": self.trials, "violations": self.violations,
                "brackets_hold": self.brackets_hold, "ea1_mean": self.ea1_mean, "ea1_se": self.ea1_se,
                "ea1_formula": self.ea1_formula, "ea1_z": self.ea1_z}


def neighbor_counts(samples, eta: float) -> np.ndarray:
    """``m_i = #{j != i : ccw(P_i, P_j) <= eta}``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    ext = np.concatenate([x, x + TWO_PI])
    hi = np.searchsorted(ext, x + eta, side="right")
    return np.minimum(hi - np.arange(n) - 1, n - 1)


def bonferroni_terms(counts: np.ndarray, n_max: int) -> tuple[list[int], int]:
    """Exact ``N A_k`` for ``k <= n_max`` and ``N nu_N([0, s])`` as integers."""
    A = [sum(math.comb(int(m), k) for m in counts) for k in range(1, n_max + 1)]
    return A, int(np.count_nonzero(counts))


def bonferroni_brackets(run: ProcessRun, measure: TangencyMeasure, s: float,
                        n_max: int = MAX_BONFERRONI_ORDER) -> BonferroniReport:
    """Check ``B_2n <= nu_N([0, s]) <= B_2n+1`` on every trial, exactly, and ``E(A_1)``.

    ``E(A_1) = (N - 1) P(P_2 in L(P_1, eta))``; with distinct draws the pair
    probability is ``mean_x #{y != x in L(x, eta)} / (M - 1)`` over the ``M``
    tangencies.
    """
    if run.N > MAX_BONFERRONI_N:
        raise ValueError(f"N = {run.N} exceeds {MAX_BONFERRONI_N}")
    if not 1 <= n_max <= MAX_BONFERRONI_ORDER:
        raise ValueError(f"n_max must lie in [1, {MAX_BONFERRONI_ORDER}]")
    eta = s * run.N ** (-1.0 / run.delta)
    As = np.zeros((run.trials, n_max))
    nus = np.zeros(run.trials)
    violations = 0
    for t in range(run.trials):
        counts = neighbor_counts(run.samples[t], eta)
        A, hit = bonferroni_terms(counts, n_max)
        partial = 0
        for k in range(1, n_max + 1):
            partial += A[k - 1] if k % 2 else -A[k - 1]
            if (k % 2 == 1 and hit > partial) or (k % 2 == 0 and hit < partial):
                violations += 1
        As[t] = np.array(A) / run.N
        nus[t] = hit / run.N
    a1 = As[:, 0]
    se = float(a1.std(ddof=1) / math.sqrt(run.trials)) if run.trials > 1 else 0.0
    pair = float(measure.count_ccw(measure.angles, eta).mean()) / (measure.size - 1)
    return BonferroniReport(float(s), n_max, run.trials, violations, As, nus, float(a1.mean()), se,
                            (run.N - 1) * pair)


@dataclass(frozen=True)
class TailFit:
    rate: float
    rate_lsq: float
    s: np.ndarray
    tail: np.ndarray
    delta: float

    @property
    def holds(self) -> bool:
        return bool(0.0 < self.rate < math.inf
                    and np.all(self.tail <= np.exp(-self.rate * self.s**self.delta)))


def fit_tail(nu: Ecdf, delta: float, s_grid: Sequence[float] = tuple(np.arange(1.0, 6.01, 0.25))) -> TailFit:
    """Largest ``c`` with ``nu([s, inf)) <= exp(-c s^delta)`` on the grid, plus a least-squares rate."""
    s = np.asarray(s_grid, dtype=float)
    below = np.searchsorted(nu.values, s, side="left") / len(nu)
    tail = 1.0 - below
    pos = tail > 0
    sp = s ** delta
    y = -np.log(tail[pos])
    rate = float(np.min(y / sp[pos])) if pos.any() else math.inf
    rate_lsq = float(np.dot(sp[pos], y) / np.dot(sp[pos], sp[pos])) if pos.any() else math.inf
    return TailFit(rate, rate_lsq, s, tail, delta)
