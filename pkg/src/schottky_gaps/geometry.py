"""Circle, reflection and Moebius arithmetic on the Poincare disk.

Words are tuples of letters in ``{1, 2, 3}``; a word ``(s1, ..., sn)`` acts on
a point as ``s1(s2(...sn(z)))``.  Reflections are anti-holomorphic, so a
:class:`DiskMap` carries a parity flag next to its SU(1,1) matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GeometryDomainError, InvariantError

TWO_PI = 2.0 * math.pi

Word = tuple[int, ...]


def wrap_angle(phi: float) -> float:
    """Reduce an angle to ``[0, 2*pi)``."""
    r = phi % TWO_PI
    if r >= TWO_PI:
        return 0.0
    return r


def angle_diff_ccw(a: float, b: float) -> float:
    """Counterclockwise arclength from ``a`` to ``b``."""
    return wrap_angle(b - a)


@dataclass(frozen=True, slots=True)
class ReflectionCircle:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryDomainError(f"radius must be positive, got {self.radius}")
        c2 = abs(self.center) ** 2
        if c2 <= 1.0:
            raise GeometryDomainError("center of an isometry circle must lie outside the unit disk")
        if abs(c2 - self.radius**2 - 1.0) > 1e-12 * max(1.0, c2):
            raise GeometryDomainError("circle is not orthogonal to the unit circle")

    def reflect(self, z: complex) -> complex:
        d = z - self.center
        return self.center + self.radius**2 / d.conjugate()

    def derivative_abs(self, z: complex) -> float:
        """``|rho'(z)|`` for the reflection, ``R^2 / |z - c|^2``."""
        return self.radius**2 / abs(z - self.center) ** 2

    def matrix(self) -> np.ndarray:
        """SU(1,1) matrix ``m`` with ``rho(z) = m . conj(z)``."""
        c = self.center
        s = 1j / self.radius
        return np.array([[s * c, -s], [s, -s * c.conjugate()]], dtype=complex)


@dataclass(frozen=True, slots=True)
class TangentCircle:
    """Circle ``C((1 - r) e^{i theta}, r)`` internally tangent to the unit circle."""

    theta: float
    kappa: float

    def __post_init__(self):
        if not self.kappa >= 1.0 - 1e-12:
            raise GeometryDomainError(f"curvature {self.kappa} < 1 does not fit in the disk")

    @property
    def radius(self) -> float:
        return 1.0 / self.kappa

    @property
    def center(self) -> complex:
        return (1.0 - self.radius) * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def tangency(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


def reflect_boundary_point(c: ReflectionCircle, phi: float) -> float:
    """Angle of the reflection of ``e^{i phi}`` in ``c``."""
    cx, cy = c.center.real, c.center.imag
    dx = math.cos(phi) - cx
    dy = math.sin(phi) - cy
    f = c.radius * c.radius / (dx * dx + dy * dy)
    return wrap_angle(math.atan2(cy + f * dy, cx + f * dx))


def reflect_tangent_scalar(cx: float, cy: float, R: float, theta: float, kappa: float,
                           strict: bool = True) -> tuple[float, float]:
    """Float-only core of :func:`reflect_tangent_circle` (enumeration hot path)."""
    r = 1.0 / kappa
    ct, st = math.cos(theta), math.sin(theta)
    px = (1.0 - r) * ct - cx
    py = (1.0 - r) * st - cy
    L2 = px * px + py * py
    if strict and L2 <= (R + r) * (R + r):
        raise GeometryDomainError("tangent circle meets the closed disk of the reflection circle")
    kappa2 = (L2 - r * r) / (R * R) * kappa
    dx = ct - cx
    dy = st - cy
    f = R * R / (dx * dx + dy * dy)
    theta2 = wrap_angle(math.atan2(cy + f * dy, cx + f * dx))
    return theta2, kappa2


def reflect_tangent_circle(c: ReflectionCircle, tc: TangentCircle, strict: bool = True) -> TangentCircle:
    """Image of a tangent circle under reflection in ``c``.

    Curvature follows the inversion rule ``(L^2 - r^2) / (R^2 r)``.  With
    ``strict`` the input must be disjoint from the closed disk bounded by ``c``;
    this is what every step of a reduced word satisfies.
    """
    theta, kappa = reflect_tangent_scalar(c.center.real, c.center.imag, c.radius,
                                          tc.theta, tc.kappa, strict)
    return TangentCircle(theta, kappa)


def kappa_via_derivative(c: ReflectionCircle, tc: TangentCircle) -> float:
    """Image curvature from the boundary derivative at the tangency point.

    For circles tangent to the unit circle, ``kappa - 1`` scales by
    ``1 / |rho'(xi)|`` (horocycle rule), which is exact.
    """
    return 1.0 + (tc.kappa - 1.0) / c.derivative_abs(tc.tangency)


@dataclass(frozen=True)
class DiskMap:
    """Isometry ``z -> m . z`` (or ``m . conj(z)`` when ``conjugating``)."""

    m: np.ndarray
    conjugating: bool = False

    @staticmethod
    def identity() -> "DiskMap":
        return DiskMap(np.eye(2, dtype=complex), False)

    @property
    def xi(self) -> complex:
        return complex(self.m[0, 0])

    @property
    def eta(self) -> complex:
        return complex(self.m[0, 1])

    def apply(self, z: complex) -> complex:
        if self.conjugating:
            z = z.conjugate()
        xi, eta = self.xi, self.eta
        return (xi * z + eta) / (eta.conjugate() * z + xi.conjugate())

    def apply_boundary(self, phi: float) -> float:
        w = self.apply(complex(math.cos(phi), math.sin(phi)))
        return wrap_angle(math.atan2(w.imag, w.real))

    def boundary_distance(self, phi1: float, phi2: float) -> float:
        """Arclength between the images of two boundary points.

        Uses ``|g(z1) - g(z2)| = |z1 - z2| / |(eta* z1 + xi*)(eta* z2 + xi*)|``,
        which avoids cancellation when the images are very close.
        """
        z1 = complex(math.cos(phi1), math.sin(phi1))
        z2 = complex(math.cos(phi2), math.sin(phi2))
        if self.conjugating:
            z1, z2 = z1.conjugate(), z2.conjugate()
        a, b = self.eta.conjugate(), self.xi.conjugate()
        chord = abs(z1 - z2) / abs((a * z1 + b) * (a * z2 + b))
        return 2.0 * math.asin(min(1.0, chord / 2.0))

    def compose(self, other: "DiskMap") -> "DiskMap":
        """``self o other``."""
        rhs = other.m.conj() if self.conjugating else other.m
        return DiskMap(_renormalize(self.m @ rhs), self.conjugating ^ other.conjugating)

    def frobenius_sq(self) -> float:
        """``(|a|^2 + |b|^2 + |c|^2 + |d|^2) / 2 = |xi|^2 + |eta|^2``."""
        return abs(self.xi) ** 2 + abs(self.eta) ** 2


def _renormalize(p: np.ndarray) -> np.ndarray:
    """Restore ``|xi|^2 - |eta|^2 = 1`` while keeping ``|xi|^2 + |eta|^2`` fixed.

    The drift ``eps`` is measured with cancellation error ~ machine eps times
    the Frobenius norm, so a uniform rescale would push that error into every
    entry; scaling ``|xi|^2`` by ``1 - eps/F`` and ``|eta|^2`` by ``1 + eps/F``
    removes the drift with only ~ machine-eps relative change.
    """
    xi, eta = complex(p[0, 0]), complex(p[0, 1])
    a2, b2 = abs(xi) ** 2, abs(eta) ** 2
    F = a2 + b2
    drift = a2 - b2 - 1.0
    if abs(drift) > 1e-10 * F:
        raise InvariantError(f"SU(1,1) normalization drifted to {1.0 + drift!r}")
    xi *= math.sqrt(1.0 - drift / F)
    eta *= math.sqrt(1.0 + drift / F)
    return np.array([[xi, eta], [eta.conjugate(), xi.conjugate()]], dtype=complex)


def check_word(word: Sequence[int]) -> Word:
    w = tuple(int(x) for x in word)
    for x in w:
        if x not in (1, 2, 3):
            raise GeometryDomainError(f"letter {x} is not one of 1, 2, 3")
    for u, v in zip(w, w[1:]):
        if u == v:
            raise GeometryDomainError(f"word {w} is not reduced")
    return w


def word_to_map(cfg, word: Sequence[int]) -> DiskMap:
    """Compose the reflections of a reduced word into a :class:`DiskMap`."""
    w = check_word(word)
    g = DiskMap.identity()
    for letter in w:
        g = g.compose(DiskMap(cfg.circles[letter - 1].matrix(), True))
    return g


@dataclass(frozen=True, slots=True)
class CartanCoords:
    phi1: float
    t: float
    phi2: float


def k_matrix(phi: float) -> np.ndarray:
    e = complex(math.cos(phi / 2), math.sin(phi / 2))
    return np.array([[e, 0], [0, e.conjugate()]], dtype=complex)


def a_matrix(t: float) -> np.ndarray:
    ch, sh = math.cosh(t / 2), math.sinh(t / 2)
    return np.array([[ch, sh], [sh, ch]], dtype=complex)


def cartan_reconstruct(cc: CartanCoords) -> np.ndarray:
    return k_matrix(cc.phi1) @ a_matrix(cc.t) @ k_matrix(math.pi - cc.phi2)


def cartan_decompose(g: DiskMap) -> CartanCoords:
    """Write ``g = k(phi1) a(t) k(pi - phi2)``.

    ``xi = e^{i(phi1 + psi)/2} cosh(t/2)`` and ``eta = e^{i(phi1 - psi)/2} sinh(t/2)``
    with ``psi = pi - phi2``.  At ``t = 0`` the split is degenerate and
    ``phi2 = pi`` is used, leaving the rotation in ``phi1``.
    """
    if g.conjugating:
        raise GeometryDomainError("Cartan decomposition needs an orientation-preserving map")
    xi, eta = g.xi, g.eta
    t = 2.0 * math.asinh(abs(eta))
    a = math.atan2(xi.imag, xi.real)
    if abs(eta) < 1e-15:
        return CartanCoords(wrap_angle(2.0 * a), 0.0, math.pi)
    b = math.atan2(eta.imag, eta.real)
    return CartanCoords(wrap_angle(a + b), t, wrap_angle(math.pi - (a - b)))


def curvature_via_cartan(cc: CartanCoords, theta: float, r: float) -> float:
    """Curvature of the image of ``C((1-r)e^{i theta}, r)`` from Cartan coordinates.

    ``1 +- cos(alpha)`` are evaluated as ``2 cos^2(alpha/2)``, ``2 sin^2(alpha/2)``.
    """
    if not 0.0 < r < 1.0:
        raise GeometryDomainError(f"radius {r} outside (0, 1)")
    half = 0.5 * (math.pi - cc.phi2 + theta)
    c2, s2 = math.cos(half) ** 2, math.sin(half) ** 2
    q = (1.0 - r) / r
    return math.exp(cc.t) * q * c2 + math.exp(-cc.t) * q * s2 + 1.0


def tangency_via_cartan(cc: CartanCoords, theta: float) -> float:
    """Image tangency angle from the arcsin formula (principal branch only).

    Raises :class:`GeometryDomainError` when the true image lies more than
    ``pi/2`` from ``phi1``, where the principal arcsin returns the wrong branch.
    """
    alpha = math.pi - cc.phi2 + theta
    ca, sa = math.cos(alpha), math.sin(alpha)
    if math.sinh(cc.t) + math.cosh(cc.t) * ca < 0.0:
        raise GeometryDomainError("image angle outside the principal arcsin regime")
    denom = math.exp(cc.t) * (1.0 + ca) + math.exp(-cc.t) * (1.0 - ca)
    x = max(-1.0, min(1.0, 2.0 * sa / denom))
    return wrap_angle(cc.phi1 + math.asin(x))


def circle_through(z1: complex, z2: complex, z3: complex) -> tuple[complex, float]:
    """Center and radius of the circle through three points."""
    ax, ay = z1.real, z1.imag
    bx, by = z2.real, z2.imag
    cx, cy = z3.real, z3.imag
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        raise GeometryDomainError("points are collinear")
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    center = complex(ux, uy)
    return center, abs(z1 - center)
