"""Rotation numbers: continued fractions, convergents and Brjuno sums.

Quotients are extracted from the Gauss map ``x -> frac(1/x)`` in extended
precision (mpmath). Quadratic irrationals are handled exactly with integer
surd arithmetic, so named constants such as the golden mean never pass
through a rounded decimal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from .errors import RationalInput

__all__ = [
    "QUADRATICS",
    "BrjunoPartial",
    "RotationNumber",
    "bounded_type_prefix",
    "brjuno_partial",
    "brjuno_tail_bound",
    "continued_fraction",
    "convergents",
    "from_quadratic",
    "from_quotients",
    "multiplier",
    "multiplier_mp",
    "named_quadratic",
]

MIN_DPS = 50
RATIONAL_EPS = mpmath.mpf("1e-30")

# theta = p + q*sqrt(d)
QUADRATICS = {
    "golden": (Fraction(-1, 2), Fraction(1, 2), 5),
    "sqrt2m1": (Fraction(-1), Fraction(1), 2),
}


@dataclass(frozen=True)
class RotationNumber:
    """A real ``theta`` in (0, 1) with its continued-fraction data.

    ``quotients`` holds the partial quotients a_1, a_2, ... and ``orbit``
    the Gauss-map orbit theta_0 = theta, theta_1, ... (as mpf values at
    ``dps`` digits). ``rational`` is set when the expansion terminated
    before ``depth`` quotients were produced.
    """

    theta: mpmath.mpf
    quotients: tuple
    depth: int
    exact_quadratic: Optional[tuple] = None
    rational: bool = False
    orbit: tuple = field(default=(), repr=False)
    dps: int = MIN_DPS

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if any(a < 1 for a in self.quotients):
            raise ValueError("partial quotients must be positive")

    def __float__(self):
        return float(self.theta)

    @property
    def label(self) -> str:
        if self.exact_quadratic is not None:
            for name, desc in QUADRATICS.items():
                if desc == self.exact_quadratic:
                    return name
            p, q, d = self.exact_quadratic
            return f"{p}+{q}*sqrt({d})"
        return mpmath.nstr(self.theta, 17)


@dataclass(frozen=True)
class BrjunoPartial:
    n: int
    value: float
    beta_tail: float


def _working_dps(depth, dps):
    return max(MIN_DPS, 20 + depth, dps or 0)


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, RotationNumber):
        return +x.theta
    return mpmath.mpf(x)


def continued_fraction(x, depth: int, dps: Optional[int] = None) -> RotationNumber:
    """Expand ``x`` in (0, 1) to ``depth`` partial quotients.

    ``x`` may be a float, a decimal string (parsed at working precision), a
    ``Fraction`` or an mpf. The expansion stops early and is flagged
    ``rational`` if the Gauss orbit hits zero (below 1e-30).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if isinstance(x, Fraction):
        return _rational_expansion(x, depth)
    dps = _working_dps(depth, dps)
    with mpmath.workdps(dps):
        theta = _to_mpf(x)
        if not 0 < theta < 1:
            raise ValueError("x must lie in (0, 1)")
        quotients = []
        orbit = [theta]
        xk = theta
        rational = False
        while len(quotients) < depth:
            inv = 1 / xk
            a = int(mpmath.floor(inv))
            xk = inv - a
            # a quotient of 0 would mean inv rounded just below an integer
            if xk > 1 - RATIONAL_EPS:
                a, xk = a + 1, mpmath.mpf(0)
            quotients.append(a)
            if xk < RATIONAL_EPS:
                rational = True
                break
            orbit.append(xk)
    return RotationNumber(
        theta=theta,
        quotients=tuple(quotients),
        depth=depth,
        rational=rational,
        orbit=tuple(orbit),
        dps=dps,
    )


def _rational_expansion(x: Fraction, depth):
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    dps = _working_dps(depth, None)
    quotients, orbit = [], []
    xk = x
    while xk != 0 and len(quotients) < depth:
        orbit.append(xk)
        a, rem = divmod(1 / xk, 1)
        quotients.append(int(a))
        xk = rem
    with mpmath.workdps(dps):
        orbit_mp = tuple(_to_mpf(v) for v in orbit)
        theta = orbit_mp[0]
    return RotationNumber(
        theta=theta,
        quotients=tuple(quotients),
        depth=depth,
        rational=xk == 0,
        orbit=orbit_mp,
        dps=dps,
    )


def _surd_floor(P, D, Q):
    # floor((P + sqrt(D)) / Q) for non-square D > 0
    y = P + math.isqrt(D)  # floor(P + sqrt(D))
    if Q > 0:
        return y // Q
    return -((y // -Q) + 1)


def from_quadratic(p, q, d: int, depth: int = 60, dps: Optional[int] = None) -> RotationNumber:
    """Exact expansion of ``theta = p + q*sqrt(d)`` (rational p, q; integer d)."""
    p, q = Fraction(p), Fraction(q)
    d = int(d)
    if d <= 0 or math.isqrt(d) ** 2 == d or q == 0:
        raise ValueError("need q != 0 and a positive non-square d")
    # write theta as (P + sqrt(D)) / Q with Q | D - P^2
    L = math.lcm(p.denominator, q.denominator)
    P = int(p * L)
    D = int((q * L) ** 2) * d
    Q = L
    if q < 0:
        P, Q = -P, -Q
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)

    dps = _working_dps(depth, dps)
    with mpmath.workdps(dps):
        sqrtD = mpmath.sqrt(D)
        theta = (P + sqrtD) / Q
        if not 0 < theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        quotients, orbit = [], [theta]
        # step past the integer part (which is 0)
        P, Q = -P, (D - P * P) // Q
        while len(quotients) < depth:
            a = _surd_floor(P, D, Q)
            quotients.append(a)
            P = a * Q - P
            Q = (D - P * P) // Q
            # theta_k = 1 / x_{k+1} with x_{k+1} = (P + sqrt D)/Q
            orbit.append(Q / (P + sqrtD))
    return RotationNumber(
        theta=theta,
        quotients=tuple(quotients),
        depth=depth,
        exact_quadratic=(p, q, d),
        orbit=tuple(orbit),
        dps=dps,
    )


def named_quadratic(name: str, depth: int = 60, dps: Optional[int] = None) -> RotationNumber:
    try:
        p, q, d = QUADRATICS[name]
    except KeyError:
        raise ValueError(
            f"unknown quadratic {name!r}; choose from {sorted(QUADRATICS)}"
        ) from None
    return from_quadratic(p, q, d, depth=depth, dps=dps)


def from_quotients(
    quotients: Sequence[int],
    tail: Sequence[int] = (),
    depth: Optional[int] = None,
    dps: Optional[int] = None,
) -> RotationNumber:
    """Build ``[0; a_1, ..., a_n, tail, tail, ...]``.

    Without a ``tail`` the result is the rational number with exactly the
    given quotients. With a periodic ``tail`` the number is a quadratic
    irrational, of bounded type.
    """
    quotients = [int(a) for a in quotients]
    tail = [int(a) for a in tail]
    if any(a < 1 for a in quotients + tail):
        raise ValueError("partial quotients must be positive")
    if not tail:
        if not quotients:
            raise ValueError("need at least one quotient")
        x = Fraction(0)
        for a in reversed(quotients):
            x = 1 / (a + x)
        return _rational_expansion(x, depth or len(quotients))

    depth = depth or len(quotients) + 4 * len(tail) + 20
    full = list(quotients)
    while len(full) < depth + 1:
        full.extend(tail)
    dps = _working_dps(depth, dps)
    with mpmath.workdps(dps + 10):
        # the purely periodic complete quotient y = [b_1; b_2, ..., b_m, y]
        p0, p1, q0, q1 = 1, tail[0], 0, 1
        for b in tail[1:]:
            p0, p1 = p1, b * p1 + p0
            q0, q1 = q1, b * q1 + q0
        # y = (p1 y + p0)/(q1 y + q0)  =>  q1 y^2 + (q0 - p1) y - p0 = 0
        disc = (q0 - p1) ** 2 + 4 * q1 * p0
        y = ((p1 - q0) + mpmath.sqrt(disc)) / (2 * q1)
        # complete quotients x_k (k = 1..) by backward recursion from the tail
        n = len(quotients)
        xs = {n + 1: y}
        for k in range(n, 0, -1):
            xs[k] = full[k - 1] + 1 / xs[k + 1]
        orbit = []
        for k in range(depth + 1):
            idx = k + 1
            if idx in xs:
                xk = xs[idx]
            else:
                xk = _periodic_complete_quotient(tail, y, idx - (n + 1))
            orbit.append(1 / xk)
    with mpmath.workdps(dps):
        orbit = tuple(+v for v in orbit)
    return RotationNumber(
        theta=orbit[0],
        quotients=tuple(full[:depth]),
        depth=depth,
        orbit=orbit,
        dps=dps,
    )


def _periodic_complete_quotient(tail, y, offset):
    # complete quotient at position `offset` inside the repeating tail
    j = offset % len(tail)
    if j == 0:
        return y
    # x_j = [tail_j; tail_{j+1}, ..., tail_{m-1}, y]
    x = y
    for b in reversed(tail[j:]):
        x = b + 1 / x
    return x


def convergents(rn: RotationNumber) -> list[tuple[int, int]]:
    """Convergents ``(p_k, q_k)`` for k = 1 .. len(quotients)."""
    if not rn.quotients:
        raise ValueError("no partial quotients")
    out = []
    p0, p1 = 1, 0
    q0, q1 = 0, 1
    for a in rn.quotients:
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append((p1, q1))
    return out


def bounded_type_prefix(rn: RotationNumber) -> tuple[int, Callable[[int], bool]]:
    """Largest quotient over the computed prefix, and a bound predicate.

    This certifies nothing about the quotients beyond the prefix.
    """
    top = max(rn.quotients) if rn.quotients else 0
    return top, lambda bound: top <= bound


def brjuno_partial(rn: RotationNumber, n: int) -> BrjunoPartial:
    """Partial Brjuno sum ``sum_{k<n} beta_{k-1} log(1/theta_k)``.

    Yoccoz normalisation: beta_{-1} = 1 and beta_k = theta_0 ... theta_k
    along the Gauss orbit.
    """
    if rn.rational:
        raise RationalInput("the continued fraction terminated; theta is rational")
    if not 1 <= n <= min(len(rn.orbit), rn.depth):
        raise ValueError(f"n must lie in 1..{min(len(rn.orbit), rn.depth)}")
    with mpmath.workdps(rn.dps):
        beta = mpmath.mpf(1)
        total = mpmath.mpf(0)
        for k in range(n):
            total += beta * mpmath.log(1 / rn.orbit[k])
            beta *= rn.orbit[k]
        return BrjunoPartial(n=n, value=float(total), beta_tail=float(beta))


def brjuno_tail_bound(rn: RotationNumber, n: int, bound: int) -> float:
    """Upper bound for the Brjuno tail beyond ``n`` terms.

    Valid when every quotient past the prefix is at most ``bound``; uses
    theta_k theta_{k+1} < 1/2, so the tail is below 4 beta_{n-1} log(bound+1).
    """
    part = brjuno_partial(rn, n)
    return 4 * part.beta_tail * math.log(bound + 1)


def _theta_mp(theta, dps):
    if isinstance(theta, RotationNumber):
        return +theta.theta
    if isinstance(theta, Fraction):
        return mpmath.mpf(theta.numerator) / theta.denominator
    return mpmath.mpf(theta)


def multiplier_mp(theta, dps: int = MIN_DPS) -> mpmath.mpc:
    """``exp(2 pi i theta)`` at ``dps`` digits."""
    with mpmath.workdps(dps + 5):
        t = _theta_mp(theta, dps)
        return mpmath.expjpi(2 * t)


def multiplier(theta) -> complex:
    """``exp(2 pi i theta)`` rounded to double precision."""
    return complex(multiplier_mp(theta, 30))
