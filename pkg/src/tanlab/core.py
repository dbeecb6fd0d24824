"""Evaluation and structural algebra of the tangent family f(z) = lam * tan(z).

The map factors as ``M1(exp(2iz))`` with the Moebius map
``M1(w) = -lam*i*(w - 1)/(w + 1)``; consequently horizontal lines are sent
to circles around the two omitted values ``+-i*lam`` and every preimage set
comes in translates by multiples of pi.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClearanceViolation,
    DegenerateMoebius,
    InvalidRadius,
    LiftDivergence,
    OmittedValue,
)

__all__ = [
    "INFINITY",
    "POLE",
    "LinearMap",
    "MoebiusMap",
    "Pole",
    "Polyline",
    "StripSpec",
    "TangentMap",
    "asymptotic_values",
    "decompose",
    "derivative",
    "evaluate",
    "halfplane_radius_for_disk",
    "inverse_branch",
    "is_pole",
    "lift_curve",
    "line_image_circle",
    "normal_form_singular_values",
    "pole_distance",
]

#: The point at infinity of the Riemann sphere.
INFINITY = math.inf

POLE_RTOL = 1e-12
LIFT_CLEARANCE = 1e-3
LIFT_MAX_STEP = math.pi / 4
LIFT_MAX_DEPTH = 48
HALFPLANE_R_MAX = 50.0
HALFPLANE_TOL = 1e-9


class Pole:
    """Result of evaluating at (or indistinguishably near) a pole."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Pole"

    def __reduce__(self):
        return (Pole, ())


POLE = Pole()


def is_infinite(z) -> bool:
    return cmath.isinf(complex(z))


@dataclass(frozen=True)
class TangentMap:
    """The map ``z -> lam * tan(z)`` for a nonzero complex ``lam``."""

    lam: complex

    def __post_init__(self):
        lam = complex(self.lam)
        if lam == 0 or not cmath.isfinite(lam):
            raise ValueError("lambda must be nonzero")
        object.__setattr__(self, "lam", lam)

    @property
    def asymptotic_values(self) -> tuple[complex, complex]:
        return (1j * self.lam, -1j * self.lam)

    @property
    def multiplier(self) -> complex:
        """Derivative at the fixed point 0."""
        return self.lam

    def __call__(self, z):
        """Vectorised evaluation with no pole bookkeeping."""
        return self.lam * np.tan(z)


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a z + b) / (c z + d)`` acting on the Riemann sphere."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.determinant == 0:
            raise DegenerateMoebius("ad - bc must be nonzero")

    @classmethod
    def identity(cls) -> MoebiusMap:
        return cls(1, 0, 0, 1)

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        a, b, c, d = self.a, self.b, self.c, self.d
        if is_infinite(z):
            return INFINITY if c == 0 else a / c
        num = a * z + b
        den = c * z + d
        if den == 0:
            return INFINITY
        return num / den

    def compose(self, other: MoebiusMap) -> MoebiusMap:
        """Return ``self o other``."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> MoebiusMap:
        return MoebiusMap(self.d, -self.b, -self.c, self.a)


@dataclass(frozen=True)
class LinearMap:
    """``z -> alpha z + beta`` with ``alpha != 0``."""

    alpha: complex
    beta: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")

    def __call__(self, z):
        return self.alpha * z + self.beta


@dataclass(frozen=True)
class StripSpec:
    """The horizontal strip ``{|Im z| < R}``."""

    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("strip half-width must be positive")

    def contains(self, z) -> bool:
        return abs(complex(z).imag) < self.R


class Polyline:
    """An ordered list of complex points.

    Consecutive duplicates are dropped on construction, so a constant
    "curve" collapses to a single point.
    """

    def __init__(self, points, closed=False):
        pts = np.asarray(points, dtype=complex).ravel()
        if pts.size == 0:
            raise ValueError("a polyline needs at least one point")
        keep = np.ones(pts.size, dtype=bool)
        keep[1:] = pts[1:] != pts[:-1]
        self.points = pts[keep]
        self.points.setflags(write=False)
        self.closed = bool(closed)

    def __len__(self):
        return self.points.size

    def __iter__(self):
        return iter(self.points)

    def __repr__(self):
        return f"Polyline(n={len(self)}, closed={self.closed})"

    def segments(self):
        """Pairs of consecutive vertices, including the closing one."""
        pts = self.points
        if self.closed and pts.size > 1:
            return pts, np.roll(pts, -1)
        return pts[:-1], pts[1:]

    @property
    def max_segment_length(self) -> float:
        a, b = self.segments()
        return float(np.abs(b - a).max()) if a.size else 0.0

    def translate(self, shift) -> Polyline:
        return Polyline(self.points + shift, closed=self.closed)

    def distance_to(self, z) -> np.ndarray:
        """Euclidean distance from each point of ``z`` to the polyline."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self) == 1:
            return np.abs(z - self.points[0])
        a, b = self.segments()
        return _segment_distance(z[:, None], a[None, :], b[None, :]).min(axis=1)


def _segment_distance(z, a, b):
    d = b - a
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, ((z - a) * np.conj(d)).real / dd, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(z - (a + t * d))


def pole_distance(z) -> float:
    """Distance from ``z`` to the nearest pole pi/2 + k*pi."""
    # folded onto Re z >= 0 so that the answer is exactly even in z
    x, y = abs(complex(z).real), abs(complex(z).imag)
    k = round((x - math.pi / 2) / math.pi)
    return math.hypot(x - (math.pi / 2 + k * math.pi), y)


def is_pole(z) -> bool:
    z = complex(z)
    return pole_distance(z) < POLE_RTOL * max(1.0, abs(z.real))


def evaluate(fmap: TangentMap, z):
    """``lam * tan(z)``, or ``POLE`` when ``z`` sits on a pole."""
    z = complex(z)
    if is_pole(z):
        return POLE
    return fmap.lam * cmath.tan(z)


def derivative(fmap: TangentMap, z):
    """``lam * (1 + tan(z)**2)``, or ``POLE``."""
    z = complex(z)
    if is_pole(z):
        return POLE
    t = cmath.tan(z)
    return fmap.lam * (1 + t * t)


def asymptotic_values(fmap: TangentMap) -> tuple[complex, complex]:
    return fmap.asymptotic_values


def decompose(fmap: TangentMap) -> tuple[MoebiusMap, LinearMap]:
    """Factor ``f = M1 o exp o M2`` with ``M2(z) = 2iz``."""
    lam = fmap.lam
    m1 = MoebiusMap(-1j * lam, 1j * lam, 1, 1)
    return m1, LinearMap(2j, 0)


def _check_not_omitted(fmap, w):
    u = complex(w) / fmap.lam
    eps = 4 * np.finfo(float).eps
    if abs(u - 1j) <= eps or abs(u + 1j) <= eps:
        raise OmittedValue(f"{w!r} is an asymptotic value of f and has no preimage")
    return u


def inverse_branch(fmap: TangentMap, w, k: int = 0) -> complex:
    """Preimage ``arctan(w/lam) + k*pi`` using the principal arctangent."""
    u = _check_not_omitted(fmap, w)
    return cmath.atan(u) + k * math.pi


def _nearest_translate(fmap, w, z_prev):
    z0 = cmath.atan(complex(w) / fmap.lam)
    k = round((z_prev - z0).real / math.pi)
    return z0 + k * math.pi


def _inverse_speed(fmap, w):
    # |d(f^-1)/dw| = |lam / (lam^2 + w^2)|
    lam = fmap.lam
    return abs(lam / (lam * lam + w * w))


def lift_curve(fmap: TangentMap, curve, base_preimage) -> Polyline:
    """Continue the inverse branch through ``base_preimage`` along ``curve``.

    Returns one lifted point per vertex of ``curve``. Each segment is
    bisected internally until consecutive lifted points are less than
    pi/4 apart, which keeps the continuation on a single sheet.
    """
    if not isinstance(curve, Polyline):
        curve = Polyline(curve)
    lam = fmap.lam
    base = complex(base_preimage)
    pts = curve.points

    clearance = LIFT_CLEARANCE * abs(lam)
    near = min(float(curve.distance_to(v).min()) for v in fmap.asymptotic_values)
    if near < clearance:
        raise ClearanceViolation(
            f"curve passes within {near:.3g} of an asymptotic value "
            f"(clearance {clearance:.3g})",
            near,
        )
    fb = evaluate(fmap, base)
    if fb is POLE or abs(fb - pts[0]) > 1e-8 * (1 + abs(pts[0])):
        raise ValueError("base_preimage does not map to the first point of the curve")

    def advance(wa, wb, za, depth):
        zb = _nearest_translate(fmap, wb, za)
        speed = max(_inverse_speed(fmap, wa), _inverse_speed(fmap, wb))
        if abs(zb - za) < LIFT_MAX_STEP and abs(wb - wa) * speed < LIFT_MAX_STEP:
            return zb
        if depth >= LIFT_MAX_DEPTH:
            raise LiftDivergence(f"segment {wa!r} -> {wb!r} could not be refined")
        wm = 0.5 * (wa + wb)
        zm = advance(wa, wm, za, depth + 1)
        return advance(wm, wb, zm, depth + 1)

    lifted = [base]
    a, b = curve.segments()
    for wa, wb in zip(a, b):
        lifted.append(advance(complex(wa), complex(wb), lifted[-1], 0))
    if curve.closed and len(pts) > 1:
        # the closing segment returns to the start; drop the duplicate vertex
        lifted.pop()
    return Polyline(lifted, closed=False)


def line_image_circle(fmap: TangentMap, R: float, side: str = "upper"):
    """Image circle of the line ``Im z = +R`` (upper) or ``-R`` (lower).

    Returns ``(center, radius)`` with center ``+-i lam coth(2R)`` and radius
    ``|lam| / sinh(2R)``.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    sign = 1 if side == "upper" else -1
    center = sign * 1j * fmap.lam / math.tanh(2 * R)
    return center, abs(fmap.lam) / math.sinh(2 * R)


def _circle_excess(fmap, R):
    # largest distance from i*lam to a point of the image circle of Im z = R
    center, radius = line_image_circle(fmap, R, "upper")
    return abs(center - 1j * fmap.lam) + radius


def halfplane_radius_for_disk(fmap: TangentMap, r: float) -> StripSpec:
    """Smallest R whose upper half-plane maps into the closed disk D(i lam, r).

    By symmetry the lower half-plane ``Im z < -R`` then maps into
    D(-i lam, r), so any set whose image avoids both disks lies in S_R.
    """
    if not 0 < r < abs(fmap.lam):
        raise InvalidRadius(f"need 0 < r < |lambda| = {abs(fmap.lam):g}, got {r!r}")
    lo, hi = 0.0, HALFPLANE_R_MAX
    if _circle_excess(fmap, hi) > r:
        raise InvalidRadius(f"r = {r!r} needs a strip wider than {HALFPLANE_R_MAX}")
    while hi - lo > HALFPLANE_TOL:
        mid = 0.5 * (lo + hi)
        if _circle_excess(fmap, mid) <= r:
            hi = mid
        else:
            lo = mid
    return StripSpec(hi)


def normal_form_singular_values(M: MoebiusMap, A: LinearMap):
    """Singular values ``(M(0), M(inf))`` of ``M o exp o A``.

    Either value may be ``INFINITY``.
    """
    if M.determinant == 0:
        raise DegenerateMoebius("ad - bc must be nonzero")
    if A.alpha == 0:
        raise ValueError("A must be non-constant")
    return M(0), M(INFINITY)
