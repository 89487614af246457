"""Group configuration: boundary arcs, isometry circles, base radius r0, growth constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import ReflectionCircle, TangentCircle, wrap_angle

R0_SAFETY = 0.9

Arc = tuple[float, float]


def derive_isometry_circle(center_angle: float, arclength: float) -> ReflectionCircle:
    """Circle orthogonal to the unit circle cutting out the given minor arc."""
    if not 0.0 < arclength < math.pi:
        raise ConfigError(f"arclength {arclength} must lie in (0, pi)")
    half = arclength / 2.0
    d = 1.0 / math.cos(half)
    return ReflectionCircle(complex(d * math.cos(center_angle), d * math.sin(center_angle)),
                            math.tan(half))


def arc_of_circle(c: ReflectionCircle) -> Arc:
    """Inverse of :func:`derive_isometry_circle`."""
    return wrap_angle(math.atan2(c.center.imag, c.center.real)), 2.0 * math.atan(c.radius)


def _circular_distance(a: float, b: float) -> float:
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, 2.0 * math.pi - d)


def _inner_arc(c: ReflectionCircle, n: int) -> np.ndarray:
    """Points of ``c`` inside the closed unit disk."""
    theta, L = arc_of_circle(c)
    ends = [complex(math.cos(theta + s * L / 2), math.sin(theta + s * L / 2)) for s in (-1, 1)]
    w0, w1 = (math.atan2((e - c.center).imag, (e - c.center).real) for e in ends)
    inward = math.atan2(-c.center.imag, -c.center.real)
    # walk from w0 to w1 through the inward direction
    span = (w1 - w0) % (2 * math.pi)
    if (inward - w0) % (2 * math.pi) > span:
        span -= 2 * math.pi
    w = w0 + span * np.linspace(0.0, 1.0, n)
    return c.center + c.radius * np.exp(1j * w)


def _region_boundary(c: ReflectionCircle, n: int) -> np.ndarray:
    theta, L = arc_of_circle(c)
    minor = np.exp(1j * (theta + L * np.linspace(-0.5, 0.5, n)))
    return np.concatenate([_inner_arc(c, n), minor])


def _region_distance_numeric(ci: ReflectionCircle, cj: ReflectionCircle, n: int = 2000) -> float:
    pi, pj = _region_boundary(ci, n), _region_boundary(cj, n)
    best = math.inf
    for k in range(0, len(pi), 500):
        block = np.abs(pi[k:k + 500, None] - pj[None, :])
        best = min(best, float(block.min()))
    return best


def region_distance(ci: ReflectionCircle, cj: ReflectionCircle) -> float:
    """Euclidean distance between the regions ``D_i``, ``D_j`` cut off by two circles.

    The nearest points of the two full disks lie on the center segment; when
    both of them are inside the closed unit disk that distance is exact,
    otherwise the region boundaries are sampled.
    """
    v = cj.center - ci.center
    dist = abs(v)
    u = v / dist
    pi = ci.center + ci.radius * u
    pj = cj.center - cj.radius * u
    if abs(pi) <= 1.0 and abs(pj) <= 1.0:
        return max(0.0, dist - ci.radius - cj.radius)
    if dist <= ci.radius + cj.radius:
        return 0.0
    return _region_distance_numeric(ci, cj)


def base_circle_limit(circles) -> float:
    """Largest r for which ``C(1 - r, r)`` stays disjoint from every ``D_i``."""

    def slack(r: float) -> float:
        return min(abs((1.0 - r) - c.center) - c.radius - r for c in circles)

    if slack(0.0) <= 0.0:
        raise ConfigError("the point 1 lies inside a region D_i")
    lo, hi = 0.0, 1.0
    if slack(hi) > 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slack(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return lo


def min_separation(circles) -> float:
    return min(region_distance(circles[i], circles[j])
               for i in range(3) for j in range(i + 1, 3))


def compute_r0(circles, safety: float = R0_SAFETY) -> float:
    """Base-circle radius strictly below a third of the minimal region separation."""
    for c in circles:
        if abs(1.0 - c.center) <= c.radius:
            raise ConfigError("the point 1 lies inside a region D_i")
    sep = min_separation(circles)
    if sep <= 0.0:
        raise ConfigError("isometry circles touch or overlap; not a Schottky configuration")
    return min(safety * sep / 3.0, safety * base_circle_limit(circles))


def growth_constants(circles, r0: float) -> tuple[float, float]:
    """``a = min(1 + r0/(3R_i))`` and ``b = max((R_i + 2)^2 / R_i^2)``."""
    a = min(1.0 + r0 / (3.0 * c.radius) for c in circles)
    b = max((c.radius + 2.0) ** 2 / c.radius**2 for c in circles)
    return a, b


@dataclass(frozen=True)
class GroupConfig:
    arcs: tuple[Arc, Arc, Arc]
    circles: tuple[ReflectionCircle, ReflectionCircle, ReflectionCircle]
    r0: float
    a: float
    b: float
    r0_safety: float = R0_SAFETY
    separation: float = field(default=0.0, compare=False)

    @property
    def base_circle(self) -> TangentCircle:
        return TangentCircle(0.0, 1.0 / self.r0)

    def depth_cap(self, T: float) -> int:
        """Upper bound on the length of any word with norm below ``T``."""
        x = T * T * self.r0
        if x <= 1.0:
            return 2
        return math.ceil(math.log(x) / math.log(self.a)) + 2

    def metadata(self) -> dict:
        return {"arcs": [list(a) for a in self.arcs], "r0": self.r0, "r0_safety": self.r0_safety,
                "a": self.a, "b": self.b}


def build_config(arcs, r0: float | None = None, safety: float = R0_SAFETY) -> GroupConfig:
    """Validate three ``(center_angle, arclength)`` arcs and derive the group data."""
    arcs = tuple((wrap_angle(float(t)), float(L)) for t, L in arcs)
    if len(arcs) != 3:
        raise ConfigError("exactly three arcs are required")
    for t, L in arcs:
        if not 0.0 < L < math.pi:
            raise ConfigError(f"arclength {L} must lie in (0, pi)")
        if _circular_distance(t, 0.0) <= L / 2.0:
            raise ConfigError(f"arc centered at {t} contains the point 1")
    for i in range(3):
        for j in range(i + 1, 3):
            (ti, Li), (tj, Lj) = arcs[i], arcs[j]
            if _circular_distance(ti, tj) <= (Li + Lj) / 2.0:
                raise ConfigError(f"arcs {i + 1} and {j + 1} touch or overlap")
    circles = tuple(derive_isometry_circle(t, L) for t, L in arcs)
    sep = min_separation(circles)
    if r0 is None:
        r0 = compute_r0(circles, safety)
    else:
        r0 = float(r0)
        limit = min(sep / 3.0, base_circle_limit(circles))
        if not 0.0 < r0 < limit:
            raise ConfigError(f"r0 = {r0} must lie in (0, {limit})")
    a, b = growth_constants(circles, r0)
    return GroupConfig(arcs, circles, r0, a, b, safety, sep)


def symmetric_config() -> GroupConfig:
    """Three evenly spaced arcs of length 7pi/12, with the point 1 mid-flare."""
    L = 7.0 * math.pi / 12.0
    return build_config([(math.pi / 3.0, L), (math.pi, L), (5.0 * math.pi / 3.0, L)])


def asymmetric_config() -> GroupConfig:
    return build_config([(math.pi / 3.0, 7.0 * math.pi / 12.0), (math.pi, 5.0 * math.pi / 12.0),
                         (5.0 * math.pi / 3.0, math.pi / 2.0)])


def _min_center_distance(c: ReflectionCircle, region: ReflectionCircle, n: int = 20001) -> float:
    """``min |x - c.center|`` over the region cut off by ``region`` (convex, so its boundary)."""
    theta, L = arc_of_circle(region)
    best = math.inf
    for pts in (_inner_arc(region, n), np.exp(1j * (theta + L * np.linspace(-0.5, 0.5, n)))):
        spacing = float(np.abs(np.diff(pts)).max())
        best = min(best, float(np.abs(pts - c.center).min()) - spacing)
    return best


def step_ratio_bounds(cfg: GroupConfig) -> tuple[float, float]:
    """Rigorous lower bounds on one-step curvature ratios ``kappa(rho_i C) / kappa(C)``.

    Returns ``(first, later)``: the exact minimum over the first step out of
    the base circle, and a bound for every later step.  For a parent circle in
    ``D_j`` with radius ``r'``, ``L^2 - r'^2 >= (L - r')^2`` and ``L - r'`` is at
    least the distance from ``c_i`` to ``D_j``; the sampled distance is lowered
    by the sample spacing.
    """
    first = later = math.inf
    for i, ci in enumerate(cfg.circles):
        L = abs((1.0 - cfg.r0) - ci.center)
        first = min(first, (L * L - cfg.r0**2) / ci.radius**2)
        for j, cj in enumerate(cfg.circles):
            if i != j:
                m = _min_center_distance(ci, cj)
                later = min(later, (m / ci.radius) ** 2)
    return first, later
