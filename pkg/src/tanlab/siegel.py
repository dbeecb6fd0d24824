"""Linearisation of the Siegel disk of ``lam * tan z`` at the fixed point 0.

The Schroeder conjugacy ``phi(lam w) = lam tan(phi(w))`` with ``phi'(0) = 1``
is computed as a power series in multiprecision (gmpy2). Writing
``u = tan(phi)`` the identity ``u' = (1 + u^2) phi'`` gives every coefficient
of ``u`` from earlier ones, so the whole series costs O(N^2) operations
instead of the O(N^3) of composing powers of ``phi``.

Circles ``|w| = rho * r`` (``r`` the estimated conformal radius) are pushed
through ``phi`` to get invariant curves inside the disk; how far out those
curves reach, and how close their images come to the asymptotic values
``+-i lam``, are the numerical indicators of an unbounded disk.

Everything here is a heuristic desk-scale experiment. None of it certifies
that a disk is bounded or unbounded.
"""
from __future__ import annotations

import cmath
import csv
import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import gmpy2
import mpmath
import numpy as np

from .core import POLE, Polyline, TangentMap, evaluate
from .errors import (
    InsufficientData,
    OrbitEscaped,
    ResonantMultiplier,
    SeriesDivergence,
    TanlabError,
)
from .rotation import RotationNumber, multiplier_mp

__all__ = [
    "LinearizerSeries",
    "SiegelConfig",
    "SiegelEstimate",
    "Verdict",
    "bounded_disk_scan",
    "conformal_radius",
    "invariance_defect",
    "linearizer",
    "orbit_rotation_number",
    "schroeder_residual",
    "tan_series",
    "trace_invariant_curve",
    "unboundedness_indicators",
]

RELIABLE_RHO = 0.995
TAIL_TOL = 1e-8
TAIL_TERMS = 8
MIN_NONZERO_COEFFS = 25


def tan_series(N: int) -> list[Fraction]:
    """Exact Taylor coefficients t_0 .. t_N of tan z.

    Uses ``tan' = 1 + tan^2``, i.e. ``(n+1) t_{n+1} = [1 + tan^2]_n``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    t = [Fraction(0)] * (N + 1)
    t[1] = Fraction(1)
    for n in range(1, N):
        sq = sum((t[j] * t[n - j] for j in range(1, n)), Fraction(0))
        t[n + 1] = sq / (n + 1)
    return t


def _digits_to_bits(digits):
    return int(math.ceil(digits * math.log2(10))) + 16


def _to_gmpy(z, bits):
    """Exact conversion of complex/mpmath/gmpy2 numbers to gmpy2.mpc."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        if isinstance(z, mpmath.mpc):
            return gmpy2.mpc(_mpf_to_gmpy(z.real), _mpf_to_gmpy(z.imag))
        if isinstance(z, mpmath.mpf):
            return gmpy2.mpc(_mpf_to_gmpy(z), 0)
        return gmpy2.mpc(z)


def _mpf_to_gmpy(x):
    sign, man, exp, _ = x._mpf_
    if not man:
        return gmpy2.mpfr(0)
    v = gmpy2.mul_2exp(gmpy2.mpfr(int(man)), exp)
    return -v if sign else v


@dataclass(frozen=True, eq=False)
class LinearizerSeries:
    """Coefficients c_1 .. c_N of the linearising map at 0.

    ``coeffs[n - 1]`` is c_n as a gmpy2 ``mpc``. The series conjugates
    ``z -> lam tan(scale z) / scale`` to ``w -> lam w``; ``scale = 1`` is the
    tangent map itself.
    """

    lam: complex
    coeffs: tuple
    precision_digits: int
    smallest_denominator: float
    scale: float = 1.0
    theta: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def coefficient(self, n: int):
        return self.coeffs[n - 1]

    def as_complex(self) -> np.ndarray:
        """Coefficients rounded to double (tiny ones underflow to 0)."""
        return np.array([complex(c) for c in self.coeffs])

    def map(self) -> TangentMap:
        return TangentMap(self.lam)

    def f(self, z):
        s = self.scale
        return self.lam * np.tan(s * np.asarray(z)) / s

    def scaled_coefficients(self, R: float) -> np.ndarray:
        """Array ``a`` with ``a[n] = c_n R^n`` (``a[0] = 0``), in double."""
        R = float(R)
        key = ("scaled", R)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        bits = _digits_to_bits(self.precision_digits)
        out = np.zeros(self.N + 1, dtype=complex)
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            Rg = gmpy2.mpfr(R)
            p = gmpy2.mpfr(1)
            for n, c in enumerate(self.coeffs, start=1):
                p *= Rg
                if c != 0:
                    out[n] = complex(c * p)
        out.setflags(write=False)
        self._cache[key] = out
        return out

    def __call__(self, w):
        """Evaluate the series at ``w`` (array or scalar) in double."""
        w = np.asarray(w, dtype=complex)
        R = float(np.abs(w).max()) if w.size else 0.0
        if R == 0:
            return np.zeros_like(w)
        a = self.scaled_coefficients(R)
        return np.polyval(a[::-1], w / R)

    def derivative(self, w):
        w = np.asarray(w, dtype=complex)
        R = float(np.abs(w).max()) if w.size else 0.0
        if R == 0:
            return np.ones_like(w)
        a = self.scaled_coefficients(R)
        da = a[1:] * np.arange(1, a.size)
        return np.polyval(da[::-1], w / R) / R

    def inverse(self, z, w0=None, tol=1e-14, maxiter=60):
        """Solve ``phi(w) = z`` by Newton's method started at ``w0``."""
        z = complex(z)
        w = complex(z if w0 is None else w0)
        for _ in range(maxiter):
            step = (complex(self(w)) - z) / complex(self.derivative(w))
            w -= step
            if abs(step) <= tol * max(1.0, abs(w)):
                return w
        raise ArithmeticError("Newton inversion of the linearizer did not converge")


_GMPY_MPC = type(gmpy2.mpc(0))


def _resolve_multiplier(lam, digits):
    """Return (double lam, gmpy2 lam, theta or None)."""
    bits = _digits_to_bits(digits)
    if isinstance(lam, RotationNumber):
        lam_mp = multiplier_mp(lam, digits + 10)
        return complex(lam_mp), _to_gmpy(lam_mp, bits), float(lam.theta)
    if isinstance(lam, _GMPY_MPC):
        return complex(lam), lam, None
    if isinstance(lam, mpmath.mpc):
        return complex(lam), _to_gmpy(lam, bits), None
    lam = complex(lam)
    return lam, _to_gmpy(lam, bits), None


def linearizer(lam, N: int, precision_digits: int = 50, scale: float = 1.0) -> LinearizerSeries:
    """Schroeder series of ``lam tan(scale z)/scale`` at 0, up to degree N.

    ``lam`` is a unit-modulus multiplier given as a complex number, an
    mpmath/gmpy2 ``mpc``, or a ``RotationNumber`` (then ``lam = exp(2 pi i
    theta)`` is formed at full working precision). The coefficients obey

        c_n (lam^n - lam) = lam * T_n,

    with ``T_n`` the part of the degree-n coefficient of ``tan(phi)`` that
    only involves c_1 .. c_{n-1}. Raises ``ResonantMultiplier`` when some
    ``|lam^(n-1) - 1|`` falls below ``10**(-precision_digits/2)``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    lam_c, lam_g, theta = _resolve_multiplier(lam, precision_digits)
    if abs(abs(lam_c) - 1) > 1e-12:
        raise ValueError("the multiplier must have modulus 1 (Siegel case)")
    bits = _digits_to_bits(precision_digits)
    resonance_tol = 10.0 ** (-precision_digits / 2)

    with gmpy2.context(gmpy2.get_context(), precision=bits):
        zero = gmpy2.mpc(0)
        one = gmpy2.mpc(1)
        s2 = gmpy2.mpfr(scale) ** 2
        c = [zero] * (N + 1)  # phi
        u = [zero] * (N + 1)  # tan(s phi)/s
        S = [zero] * (N + 1)  # 1 + s^2 u^2
        kc = [zero] * (N + 1)  # coefficients of phi'
        c[1] = u[1] = kc[1] = one
        S[0] = one
        lam_pow = lam_g
        smallest = math.inf
        for n in range(2, N + 1):
            m = n - 1
            if m % 2 == 0:
                h = m // 2
                acc = sum((u[j] * u[m - j] for j in range(1, h, 2)), zero)
                acc = 2 * acc
                if h % 2:
                    acc += u[h] * u[h]
                S[m] = s2 * acc
            lam_pow *= lam_g
            den = lam_pow - lam_g
            gap = float(abs(den))  # = |lam^(n-1) - 1|
            smallest = min(smallest, gap)
            if gap < resonance_tol:
                raise ResonantMultiplier(
                    f"|lambda^{n - 1} - 1| = {gap:.3g} is below {resonance_tol:.1g}", n
                )
            if n % 2 == 0:
                # odd phi and odd tan: every product in T_n has odd total parity
                continue
            T = sum((kc[k] * S[n - k] for k in range(1, n, 2)), zero) / n
            cn = lam_g * T / den
            c[n] = cn
            u[n] = cn + T
            kc[n] = n * cn

    return LinearizerSeries(
        lam=lam_c,
        coeffs=tuple(c[1:]),
        precision_digits=precision_digits,
        smallest_denominator=smallest,
        scale=float(scale),
        theta=theta,
    )


def conformal_radius(series: LinearizerSeries) -> tuple[float, float]:
    """Hadamard-type radius ``1 / limsup |c_n|^(1/n)``.

    Fits ``log|c_n| = a + b n`` by least squares over the nonzero
    coefficients in the top half of the available degrees and returns
    ``(exp(-b), rms residual of the fit)``.
    """
    key = ("radius",)
    hit = series._cache.get(key)
    if hit is not None:
        return hit
    nonzero = [(n, c) for n, c in enumerate(series.coeffs, start=1) if c != 0]
    if len(nonzero) < MIN_NONZERO_COEFFS:
        raise InsufficientData(
            f"{len(nonzero)} nonzero coefficients; need at least {MIN_NONZERO_COEFFS}"
        )
    top = [(n, float(gmpy2.log(abs(c)))) for n, c in nonzero if n >= series.N // 2]
    n = np.array([p[0] for p in top], dtype=float)
    y = np.array([p[1] for p in top])
    slope, icept = np.polyfit(n, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * n + icept)) ** 2)))
    out = (float(math.exp(-slope)), resid)
    series._cache[key] = out
    return out


def _radius(series, radius):
    return conformal_radius(series)[0] if radius is None else float(radius)


def _trace_points(series, rho, samples, radius):
    """Samples of phi on |w| = rho * radius, plus the tail ratio."""
    R = rho * radius
    a = series.scaled_coefficients(R)
    folded = np.zeros(samples, dtype=complex)
    np.add.at(folded, np.arange(a.size) % samples, a)
    z = samples * np.fft.ifft(folded)
    nz = np.flatnonzero(a)
    last = np.abs(a[nz[-TAIL_TERMS:]]).max()
    tail = float(last / np.abs(z).min())
    return z, tail


def trace_invariant_curve(
    series: LinearizerSeries, rho: float, samples: int = 1024, radius: Optional[float] = None
) -> Polyline:
    """The closed curve ``phi(rho * r * e^{it})``, t uniform in [0, 2 pi).

    ``rho`` is a fraction of the estimated conformal radius ``r`` (or of
    ``radius`` if given). Raises ``SeriesDivergence`` when the truncated
    series is not trustworthy there.
    """
    if samples < 64:
        raise ValueError("need at least 64 samples")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if rho > RELIABLE_RHO:
        raise SeriesDivergence(f"rho = {rho} is outside the reliable zone (<= {RELIABLE_RHO})")
    z, tail = _trace_points(series, rho, samples, _radius(series, radius))
    if not np.all(np.isfinite(z)) or tail > TAIL_TOL:
        raise SeriesDivergence(
            f"last terms are {tail:.3g} of the value at rho = {rho}", tail_ratio=tail
        )
    return Polyline(z, closed=True)


def _shift_closed_samples(z, shift):
    """Trigonometric interpolation of periodic samples at ``t + shift``."""
    M = z.size
    k = np.fft.fftfreq(M, d=1.0 / M)
    return np.fft.ifft(np.fft.fft(z) * np.exp(1j * k * shift))


def invariance_defect(series: LinearizerSeries, curve: Polyline) -> float:
    """Relative failure of f-invariance of a traced curve.

    Each sample ``phi(rho r e^{it})`` is mapped by f and compared with the
    curve re-interpolated at ``t + arg(lam)``; the largest discrepancy is
    divided by the curve's diameter.
    """
    z = curve.points
    shifted = _shift_closed_samples(z, cmath.phase(series.lam))
    fz = series.f(z)
    diameter = float(np.abs(z[:, None] - z[None, :]).max()) if z.size <= 4096 else 2 * float(
        np.abs(z).max()
    )
    return float(np.abs(fz - shifted).max() / diameter)


def schroeder_residual(
    series: LinearizerSeries, fraction: float = 0.5, samples: int = 256, radius=None
) -> float:
    """``max |phi(lam w) - f(phi(w))|`` on ``|w| = fraction * radius``."""
    R = fraction * _radius(series, radius)
    w = R * np.exp(2j * np.pi * np.arange(samples) / samples)
    lhs = series(series.lam * w)
    rhs = series.f(series(w))
    return float(np.abs(lhs - rhs).max())


class Verdict(str, enum.Enum):
    UNBOUNDED_LIKELY = "UnboundedLikely"
    BOUNDED_LIKELY = "BoundedLikely"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SiegelConfig:
    """Knobs for the unboundedness experiment.

    The thresholds are heuristics calibrated on golden-mean pilot runs.
    """

    coeffs: int = 4001
    precision_digits: int = 50
    samples: int = 8192
    extent_threshold: float = 3.0
    gap_threshold: float = 0.05
    stability_tol: float = 0.02
    # grow the series (up to max_coeffs) when a trace fails the tail test
    extend: bool = True
    max_coeffs: int = 8192


@dataclass
class SiegelEstimate:
    lam: complex
    radius_estimate: float
    traces: list
    extent: float
    image_gap: float
    verdict: Verdict
    rhos: list = field(default_factory=list)
    extents: list = field(default_factory=list)
    image_gaps: list = field(default_factory=list)
    fit_quality: float = math.nan
    n_coeffs: int = 0
    theta: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)
    heuristic: bool = True

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "radius_estimate": self.radius_estimate,
            "traces": [
                {"rho": rho, "samples": len(curve), "extent": e, "image_gap": g}
                for (rho, curve), e, g in zip(self.traces, self.extents, self.image_gaps)
            ],
            "extent": self.extent,
            "image_gap": self.image_gap,
            "verdict": self.verdict.value,
            "theta": self.theta,
            "fit_quality": self.fit_quality,
            "n_coeffs": self.n_coeffs,
            "diagnostics": self.diagnostics,
            "heuristic": self.heuristic,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text

    def write_traces_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["rho", "t", "re", "im"])
            for rho, curve in self.traces:
                M = len(curve)
                for j, z in enumerate(curve.points):
                    out.writerow([repr(float(rho)), repr(2 * math.pi * j / M), repr(float(z.real)), repr(float(z.imag))])


def _image_gap(lam, z):
    fz = lam * np.tan(z)
    return float(np.minimum(np.abs(fz - 1j * lam), np.abs(fz + 1j * lam)).min())


def _rel_change(a, b):
    return abs(b - a) / max(abs(a), 1e-300)


def _verdict(extents, gaps, config):
    if len(extents) < 3:
        return Verdict.INCONCLUSIVE, "fewer than three rho values"
    e3, g3 = extents[-3:], gaps[-3:]
    tol = config.stability_tol
    growing = all(_rel_change(e3[i], e3[i + 1]) >= tol and e3[i + 1] > e3[i] for i in range(2))
    closing = all(_rel_change(g3[i], g3[i + 1]) >= tol and g3[i + 1] < g3[i] for i in range(2))
    if growing and closing:
        if extents[-1] > config.extent_threshold and gaps[-1] < config.gap_threshold:
            return Verdict.UNBOUNDED_LIKELY, "extent growing past threshold, gap closing"
        return Verdict.INCONCLUSIVE, "trends agree but thresholds not reached"
    stable = all(
        _rel_change(e3[i], e3[i + 1]) < tol and _rel_change(g3[i], g3[i + 1]) < tol
        for i in range(2)
    )
    if stable and gaps[-1] > 0 and math.isfinite(extents[-1]):
        return Verdict.BOUNDED_LIKELY, "extent and gap stabilised"
    return Verdict.INCONCLUSIVE, "no consistent trend over the last three rho values"


def _coeffs_needed(N, rho, tail):
    """Series length at which the tail ratio seen at ``N`` drops below TAIL_TOL / 10."""
    extra = math.log(tail / (TAIL_TOL / 10)) / -math.log(rho)
    return (N + int(math.ceil(extra))) | 1


def _trace_all(series, rhos, config, radius):
    traces, extents, gaps = [], [], []
    for rho in rhos:
        try:
            curve = trace_invariant_curve(series, rho, config.samples, radius)
        except SeriesDivergence as exc:
            wanted = None
            if exc.tail_ratio is not None and math.isfinite(exc.tail_ratio):
                wanted = _coeffs_needed(series.N, rho, exc.tail_ratio)
            return traces, extents, gaps, f"SeriesDivergence at rho={rho}: {exc}", wanted
        traces.append((rho, curve))
        extents.append(float(np.abs(curve.points).max()))
        gaps.append(_image_gap(series.lam, curve.points))
    return traces, extents, gaps, None, None


def unboundedness_indicators(
    lam, rhos: Sequence[float], config: SiegelConfig = SiegelConfig(), series=None
) -> SiegelEstimate:
    """Trace invariant curves for each ``rho`` and judge (un)boundedness.

    ``lam`` is a unit-modulus multiplier (complex, mpc or RotationNumber).
    ``extent`` is the largest ``|z|`` on a trace and ``image_gap`` the
    closest approach of its image to ``+-i lam``. A disk that reaches
    infinity shows growing extent and image_gap tending to 0.
    """
    rhos = [float(r) for r in rhos]
    if not rhos or any(not 0 < r < 1 for r in rhos):
        raise ValueError("rhos must lie in (0, 1)")
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValueError("rhos must be strictly increasing")
    if series is None:
        lam_c = complex(lam) if not isinstance(lam, RotationNumber) else None
        if lam_c is not None and abs(abs(lam_c) - 1) > 1e-12:
            raise ValueError("no Siegel disk at 0 unless |lambda| = 1")
        series = linearizer(lam, config.coeffs, config.precision_digits)
    requested = series.N
    while True:
        radius, fit = conformal_radius(series)
        traces, extents, gaps, error, wanted = _trace_all(series, rhos, config, radius)
        if wanted is None or not config.extend or series.N >= config.max_coeffs:
            break
        if wanted <= series.N:
            break
        series = linearizer(lam, min(wanted, config.max_coeffs), series.precision_digits, series.scale)

    diagnostics = {
        "smallest_denominator": series.smallest_denominator,
        "extent_threshold": config.extent_threshold,
        "gap_threshold": config.gap_threshold,
        "coeffs_requested": requested,
    }
    if error is not None:
        verdict, reason = Verdict.INCONCLUSIVE, error
    else:
        verdict, reason = _verdict(extents, gaps, config)
    diagnostics["reason"] = reason
    return SiegelEstimate(
        lam=series.lam,
        radius_estimate=radius,
        traces=traces,
        extent=extents[-1] if extents else math.nan,
        image_gap=gaps[-1] if gaps else math.nan,
        verdict=verdict,
        rhos=[rho for rho, _ in traces],
        extents=extents,
        image_gaps=gaps,
        fit_quality=fit,
        n_coeffs=series.N,
        theta=series.theta,
        diagnostics=diagnostics,
    )


def orbit_rotation_number(
    fmap: TangentMap,
    z0,
    iterations: int,
    series: Optional[LinearizerSeries] = None,
    bound: Optional[float] = None,
) -> float:
    """Empirical rotation number of the orbit of ``z0``, in (0, 1).

    Averages the argument increments of the linearising coordinate when
    ``series`` is given, otherwise of ``z`` itself. Increments are unwrapped
    around their circular mean so the result is insensitive to where the
    branch cut of arg falls. ``bound`` (e.g. twice the trace extent) makes
    the orbit fail with ``OrbitEscaped`` if it wanders beyond it.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    z = complex(z0)
    if z == 0:
        raise ValueError("z0 = 0 is the fixed point; its orbit has no rotation")
    coords = np.empty(iterations + 1, dtype=complex)
    w = series.inverse(z) if series is not None else z
    coords[0] = w
    for k in range(1, iterations + 1):
        z = evaluate(fmap, z)
        if z is POLE:
            raise OrbitEscaped(f"orbit hit a pole at step {k}", k)
        if bound is not None and abs(z) > bound:
            raise OrbitEscaped(f"orbit left |z| <= {bound:g} at step {k}", k)
        if series is not None:
            w = series.inverse(z, w0=fmap.lam * w)
        else:
            w = z
        coords[k] = w
    inc = np.angle(coords[1:] / coords[:-1])
    mean = cmath.phase(np.exp(1j * inc).mean())
    inc = mean + np.angle(np.exp(1j * (inc - mean)))
    return float((inc.mean() / (2 * math.pi)) % 1.0)


@dataclass
class ScanEntry:
    label: str
    theta: float
    verdict: Optional[str]
    score: Optional[float]
    extent: Optional[float]
    image_gap: Optional[float]
    radius_estimate: Optional[float]
    error: Optional[str] = None


@dataclass
class BoundedScanReport:
    """Candidates ranked by boundedness score (most stable first).

    Exploratory only: a high score is not evidence of a bounded disk in
    any rigorous sense.
    """

    entries: list
    config: SiegelConfig
    rhos: list
    heuristic: bool = True
    note: str = "heuristic ranking; boundedness is not certified"

    def to_dict(self) -> dict:
        return {
            "heuristic": self.heuristic,
            "note": self.note,
            "rhos": self.rhos,
            "config": dict(self.config.__dict__),
            "entries": [dict(e.__dict__) for e in self.entries],
        }


def _boundedness_score(est: SiegelEstimate) -> Optional[float]:
    if len(est.extents) < 3:
        return None
    e, g = est.extents[-3:], est.image_gaps[-3:]
    drift = sum(_rel_change(e[i], e[i + 1]) + _rel_change(g[i], g[i + 1]) for i in range(2))
    return float(-drift / 2)


def _scan_one(rn, rhos, config):
    if isinstance(rn, tuple):
        label, rn = rn
    else:
        label = rn.label if isinstance(rn, RotationNumber) else repr(rn)
    theta = float(rn)
    try:
        est = unboundedness_indicators(rn, rhos, config)
    except TanlabError as exc:
        return ScanEntry(label, theta, None, None, None, None, None, f"{type(exc).__name__}: {exc}")
    return ScanEntry(
        label,
        theta,
        est.verdict.value,
        _boundedness_score(est),
        est.extent,
        est.image_gap,
        est.radius_estimate,
        est.diagnostics.get("reason") if est.verdict is Verdict.INCONCLUSIVE else None,
    )


def bounded_disk_scan(
    theta_candidates,
    config: SiegelConfig = SiegelConfig(),
    rhos: Sequence[float] = (0.9, 0.95, 0.99, 0.995),
    threads: int = 1,
) -> BoundedScanReport:
    """Run the unboundedness experiment for each candidate rotation number.

    Candidates are rotation numbers or ``(label, rotation_number)`` pairs.
    Failures (resonance, divergence) are recorded per candidate and the scan
    carries on.
    """
    candidates = list(theta_candidates)
    rhos = list(rhos)
    if threads and threads > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(lambda rn: _scan_one(rn, rhos, config), candidates))
    else:
        entries = [_scan_one(rn, rhos, config) for rn in candidates]
    ranked = sorted(
        range(len(entries)),
        key=lambda i: (entries[i].score is None, -(entries[i].score or 0.0), i),
    )
    return BoundedScanReport([entries[i] for i in ranked], config, rhos)
