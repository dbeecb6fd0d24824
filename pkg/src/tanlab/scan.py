"""Orbit classification on grids of the dynamical plane and of the unit circle.

Every attracting cycle of ``lam tan z`` attracts one of the asymptotic values
``+-i lam``, so following those two orbits finds all the cycles a point can
be drawn into. Cells are then iterated in vectorised 64x64 tiles; tiles are
independent, so a scan gives the same bytes whatever the worker count.
"""
from __future__ import annotations

import cmath
import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import POLE, TangentMap, derivative, evaluate, halfplane_radius_for_disk
from .errors import IoFailure, ResonantMultiplier, TanlabError
from .rotation import RotationNumber, bounded_type_prefix, continued_fraction, convergents
from .siegel import linearizer

__all__ = [
    "CellClass",
    "ClassificationGrid",
    "Cycle",
    "ParamSample",
    "ScanConfig",
    "attracting_cycles",
    "classify_point",
    "detect_cycle",
    "orbit",
    "render",
    "scan_dynamical",
    "scan_parameter",
    "write_param_csv",
]

# tanh saturates in double precision beyond this height
DEEP_IM = 17.0
TILE = 64
MAX_RESOLUTION = 8192

UNDECIDED, NEAR_POLE_ESCAPE, SIEGEL_CANDIDATE = 0, 1, 2
FIRST_CYCLE_CODE = 3
KIND_NAMES = {
    UNDECIDED: "Undecided",
    NEAR_POLE_ESCAPE: "NearPoleEscape",
    SIEGEL_CANDIDATE: "SiegelCandidate",
}


@dataclass(frozen=True)
class ScanConfig:
    max_iter: int = 2000
    escape_im: float = DEEP_IM
    cycle_tol: float = 1e-9
    cycle_max_period: int = 8
    # circular standard deviation (radians) of argument increments allowed
    # for a SiegelCandidate orbit
    arg_spread: float = 1.0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.escape_im > 0:
            raise ValueError("escape_im must be positive")
        if self.cycle_max_period < 1:
            raise ValueError("cycle_max_period must be at least 1")

    @classmethod
    def for_map(cls, fmap: TangentMap, **overrides) -> ScanConfig:
        """Defaults with ``escape_im = max(17, R)`` for the 0.25|lam| disks."""
        R = halfplane_radius_for_disk(fmap, 0.25 * abs(fmap.lam)).R
        overrides.setdefault("escape_im", max(DEEP_IM, R))
        cfg = cls(**overrides)
        cfg.check(fmap)
        return cfg

    def check(self, fmap: TangentMap):
        R = halfplane_radius_for_disk(fmap, 0.25 * abs(fmap.lam)).R
        if self.escape_im < R:
            raise ValueError(f"escape_im = {self.escape_im} is below the strip height {R:.6g}")


@dataclass(frozen=True)
class Cycle:
    period: int
    multiplier: complex
    representative: complex
    points: tuple


@dataclass(frozen=True)
class CellClass:
    kind: str
    iterations_used: int
    period: Optional[int] = None
    representative: Optional[complex] = None


def _step(fmap, z):
    """One application of f with the deep half-plane shortcut."""
    if abs(z.imag) > DEEP_IM:
        return 1j * fmap.lam if z.imag > 0 else -1j * fmap.lam
    return evaluate(fmap, z)


def orbit(fmap: TangentMap, z0, n: int, config: Optional[ScanConfig] = None) -> list:
    """The iterates ``f(z0), ..., f^n(z0)``.

    Beyond ``|Im z| > 17`` the value of tan is replaced by its limit ``+-i``,
    which is exact in double precision there. If a pole is hit the list ends
    with ``POLE``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    z = complex(z0)
    for _ in range(n):
        z = _step(fmap, z)
        out.append(z)
        if z is POLE:
            break
    return out


def _polish(fmap, pts, steps=30):
    """Newton on f^p(z) = z from the first cycle point; falls back to pts."""
    z = pts[0]
    p = len(pts)
    for _ in range(steps):
        w, d = z, 1 + 0j
        for _ in range(p):
            dw = derivative(fmap, w)
            w = evaluate(fmap, w)
            if dw is POLE or w is POLE:
                return pts
            d *= dw
        if d == 1:
            return pts
        step = (w - z) / (d - 1)
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    if p == 1 and abs(z) < 1e-12:
        z = 0j  # f(0) = 0 exactly for every lam
    out = [z]
    for _ in range(p - 1):
        w = evaluate(fmap, out[-1])
        if w is POLE:
            return pts
        out.append(w)
    if abs(out[0] - pts[0]) > 1e3 * max(abs(pts[0] - pts[-1]), 1e-12) and p > 1:
        return pts
    return out


def _canonical_cycle(fmap, pts):
    pts = tuple(_polish(fmap, list(pts)))
    rep = min(pts, key=lambda z: (round(abs(z), 12), round(cmath.phase(z), 12) if z else 0.0))
    mult = 1 + 0j
    for z in pts:
        d = derivative(fmap, z)
        if d is POLE:
            return None
        mult *= d
    return Cycle(len(pts), mult, rep, pts)


def _follow(fmap, z, config):
    history = [complex(z)]
    P = config.cycle_max_period
    for _ in range(config.max_iter):
        z = _step(fmap, z)
        if z is POLE or not cmath.isfinite(z):
            return None
        history.append(z)
        for p in range(1, min(P, len(history) - 1) + 1):
            if abs(z - history[-1 - p]) < config.cycle_tol:
                return _canonical_cycle(fmap, history[-p:])
        if len(history) > P + 1:
            history.pop(0)
    return None


def detect_cycle(fmap: TangentMap, config: Optional[ScanConfig] = None) -> Optional[Cycle]:
    """Cycle of period <= cycle_max_period attracting the orbit of ``i lam``."""
    config = config or ScanConfig.for_map(fmap)
    return _follow(fmap, fmap.asymptotic_values[0], config)


def attracting_cycles(fmap: TangentMap, config: Optional[ScanConfig] = None) -> list:
    """Distinct cycles found from both asymptotic values (``+i lam`` first)."""
    config = config or ScanConfig.for_map(fmap)
    found = []
    for v in fmap.asymptotic_values:
        cyc = _follow(fmap, v, config)
        if cyc is None:
            continue
        if any(min(abs(cyc.representative - p) for p in c.points) < 10 * config.cycle_tol for c in found):
            continue
        found.append(cyc)
    return found


def _classify_array(lam, z, config, cycles):
    """Vectorised classification; returns (codes, iterations)."""
    n = z.size
    codes = np.full(n, UNDECIDED, dtype=np.int16)
    iters = np.full(n, config.max_iter, dtype=np.int32)
    window = 4 * config.escape_im
    cyc_pts = [np.array(c.points, dtype=complex) for c in cycles]

    idx = np.arange(n)
    z = z.astype(complex).copy()
    left = np.zeros(n, dtype=bool)
    rot = np.zeros(n, dtype=complex)
    half_pi = math.pi / 2
    for k in range(config.max_iter + 1):
        if idx.size == 0:
            break
        done = np.zeros(idx.size, dtype=bool)
        x, y = np.abs(z.real), np.abs(z.imag)
        kk = np.round((x - half_pi) / math.pi)
        pole = np.hypot(x - (half_pi + kk * math.pi), y) < 1e-12 * np.maximum(1.0, x)
        pole |= ~np.isfinite(z)
        codes[idx[pole]] = NEAR_POLE_ESCAPE
        iters[idx[pole]] = k
        done |= pole
        for ci, pts in enumerate(cyc_pts):
            hit = ~done & (np.abs(z[:, None] - pts[None, :]).min(axis=1) < config.cycle_tol)
            codes[idx[hit]] = FIRST_CYCLE_CODE + ci
            iters[idx[hit]] = k
            done |= hit
        if k == config.max_iter:
            break
        keep = ~done
        idx, z, left, rot = idx[keep], z[keep], left[keep], rot[keep]
        with np.errstate(all="ignore"):
            nxt = np.where(
                np.abs(z.imag) > DEEP_IM,
                np.where(z.imag > 0, 1j * lam, -1j * lam),
                lam * np.tan(z),
            )
            ratio = np.where((z != 0) & (nxt != 0), nxt / np.where(z == 0, 1, z), 1)
            rot += np.exp(1j * np.angle(ratio))
        z = nxt
        left |= ~(np.abs(z) < window)

    if idx.size:
        with np.errstate(all="ignore"):
            resultant = np.abs(rot) / config.max_iter
            spread = np.sqrt(-2 * np.log(np.clip(resultant, 1e-300, 1.0)))
        siegel = ~left & (spread < config.arg_spread)
        codes[idx[siegel]] = SIEGEL_CANDIDATE
    return codes, iters


def _cell_class(code, iters, cycles):
    if code >= FIRST_CYCLE_CODE:
        c = cycles[code - FIRST_CYCLE_CODE]
        return CellClass("AttractedToCycle", int(iters), c.period, c.representative)
    return CellClass(KIND_NAMES[int(code)], int(iters))


def classify_point(fmap: TangentMap, z0, config: Optional[ScanConfig] = None, cycle_hint=None) -> CellClass:
    """Class of a single starting point.

    ``cycle_hint`` is a ``Cycle``, a list of them, or None to detect the
    cycles from the asymptotic values.
    """
    config = config or ScanConfig.for_map(fmap)
    cycles = _hint_list(fmap, config, cycle_hint)
    codes, iters = _classify_array(fmap.lam, np.array([complex(z0)]), config, cycles)
    return _cell_class(codes[0], iters[0], cycles)


def _hint_list(fmap, config, hint):
    if hint is None:
        return attracting_cycles(fmap, config)
    if isinstance(hint, Cycle):
        return [hint]
    return list(hint)


@dataclass
class ClassificationGrid:
    """Per-cell classes; row 0 is the top edge (largest imaginary part)."""

    lam: complex
    rect: tuple
    resolution: tuple
    codes: np.ndarray
    iterations: np.ndarray
    cycles: list
    config: ScanConfig

    def __len__(self):
        return self.codes.size

    def cell(self, row: int, col: int) -> CellClass:
        return _cell_class(self.codes[row, col], self.iterations[row, col], self.cycles)

    def centers(self) -> np.ndarray:
        return _cell_centers(self.rect, self.resolution)

    def label(self, code: int) -> str:
        if code >= FIRST_CYCLE_CODE:
            c = self.cycles[code - FIRST_CYCLE_CODE]
            return f"AttractedToCycle(period={c.period}, rep={_fmt_complex(c.representative)})"
        return KIND_NAMES[code]

    def histogram(self) -> dict:
        codes, counts = np.unique(self.codes, return_counts=True)
        return {self.label(int(c)): int(n) for c, n in zip(codes, counts)}

    def fraction(self, code: int) -> float:
        return float(np.mean(self.codes == code))

    def partner_codes(self) -> np.ndarray:
        """Code of the class of ``-z`` for each class code."""
        table = np.arange(FIRST_CYCLE_CODE + len(self.cycles), dtype=np.int16)
        for i, c in enumerate(self.cycles):
            for j, d in enumerate(self.cycles):
                if d.period == c.period and min(abs(d.representative + p) for p in c.points) < 1e-6:
                    table[FIRST_CYCLE_CODE + i] = FIRST_CYCLE_CODE + j
        return table

    def is_symmetric(self) -> bool:
        """Does the grid commute with ``z -> -z`` (180 degree rotation)?"""
        rotated = self.codes[::-1, ::-1]
        return bool(np.array_equal(self.partner_codes()[self.codes], rotated))

    def tobytes(self) -> bytes:
        return self.codes.tobytes() + self.iterations.tobytes()


def _fmt_complex(z):
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _parse_rect(rect):
    rect = tuple(rect)
    if len(rect) == 2:
        lo, hi = complex(rect[0]), complex(rect[1])
        rect = (lo.real, lo.imag, hi.real, hi.imag)
    if len(rect) != 4:
        raise ValueError("rect is (x0, y0, x1, y1) or (lower-left, upper-right)")
    x0, y0, x1, y1 = map(float, rect)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("rect must have positive width and height")
    return (x0, y0, x1, y1)


def _axis(lo, hi, n):
    # (i - (n-1)/2) is exact, so a symmetric interval gives exactly odd centres
    mid = 0.5 * (lo + hi)
    step = (hi - lo) / n
    return mid + (np.arange(n) - (n - 1) / 2) * step


def _cell_centers(rect, resolution):
    x0, y0, x1, y1 = rect
    nx, ny = resolution
    xs = _axis(x0, x1, nx)
    ys = _axis(y0, y1, ny)[::-1]
    return xs[None, :] + 1j * ys[:, None]


def scan_dynamical(
    fmap: TangentMap,
    rect,
    resolution,
    config: Optional[ScanConfig] = None,
    threads: int = 1,
    cycles=None,
) -> ClassificationGrid:
    """Classify the centre of every cell of ``rect``.

    ``resolution`` is ``n`` or ``(nx, ny)``. Work is split in 64x64 tiles and
    the result does not depend on ``threads`` (0 means one per CPU).
    """
    config = config or ScanConfig.for_map(fmap)
    rect = _parse_rect(rect)
    if np.isscalar(resolution):
        resolution = (int(resolution), int(resolution))
    nx, ny = map(int, resolution)
    if not (1 <= nx <= MAX_RESOLUTION and 1 <= ny <= MAX_RESOLUTION):
        raise ValueError(f"resolution must be between 1 and {MAX_RESOLUTION} per axis")
    cycles = _hint_list(fmap, config, cycles)
    centers = _cell_centers(rect, (nx, ny))
    codes = np.zeros((ny, nx), dtype=np.int16)
    iters = np.zeros((ny, nx), dtype=np.int32)
    tiles = [(r, c) for r in range(0, ny, TILE) for c in range(0, nx, TILE)]

    def work(tile):
        r, c = tile
        block = centers[r : r + TILE, c : c + TILE]
        k, it = _classify_array(fmap.lam, block.ravel(), config, cycles)
        return tile, block.shape, k, it

    workers = threads or os.cpu_count() or 1
    if workers > 1 and len(tiles) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tiles))
    else:
        results = [work(t) for t in tiles]
    for (r, c), shape, k, it in results:
        codes[r : r + shape[0], c : c + shape[1]] = k.reshape(shape)
        iters[r : r + shape[0], c : c + shape[1]] = it.reshape(shape)
    return ClassificationGrid(fmap.lam, rect, (nx, ny), codes, iters, cycles, config)


@dataclass
class ParamSample:
    theta: float
    period: Optional[int]
    multiplier_abs: Optional[float]
    siegel_flag: bool
    error: Optional[str] = None


def _theta_grid(theta_range, resolution):
    lo, hi = theta_range
    lo, hi = Fraction(lo), Fraction(hi)
    return [lo + (hi - lo) * Fraction(2 * j + 1, 2 * resolution) for j in range(resolution)]


def _as_rotation(theta, depth):
    if isinstance(theta, RotationNumber):
        return theta
    return continued_fraction(theta if isinstance(theta, (Fraction, str)) else float(theta), depth)


def _siegel_flag(rn, quotient_bound, coeffs, max_denominator):
    """Can a short linearizer run be carried out at exp(2 pi i theta)?"""
    if rn.rational:
        q = convergents(rn)[-1][1]
        if q + 1 > max_denominator:
            return False, f"RationalInput: theta has denominator {q}"
        try:
            linearizer(rn, max(coeffs, q + 1))
        except ResonantMultiplier as exc:
            return False, f"ResonantMultiplier: n={exc.n}"
        return False, "RationalInput"
    top, bounded = bounded_type_prefix(rn)
    if not bounded(quotient_bound):
        return False, None
    try:
        linearizer(rn, coeffs)
    except ResonantMultiplier as exc:
        return False, f"ResonantMultiplier: n={exc.n}"
    return True, None


def scan_parameter(
    theta_range=(0, 1),
    resolution: int = 64,
    eps: float = 0.05,
    config: Optional[ScanConfig] = None,
    thetas: Optional[Sequence] = None,
    quotient_bound: int = 20,
    depth: int = 20,
    coeffs: int = 64,
    max_denominator: int = 4096,
    threads: int = 1,
) -> list:
    """Sweep rotation numbers ``theta`` on the unit circle.

    For each ``theta`` the cycle found at the radial probe
    ``(1 - eps) exp(2 pi i theta)`` is recorded, and the Siegel flag says
    whether a short linearizer run succeeds at ``exp(2 pi i theta)`` for a
    ``theta`` whose continued-fraction prefix is bounded by
    ``quotient_bound``. Grid thetas are exact rationals (cell midpoints), so
    they are reported resonant. Pass ``thetas`` to scan explicit values.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    samples = list(thetas) if thetas is not None else _theta_grid(theta_range, resolution)

    def one(theta):
        errors = []
        try:
            rn = _as_rotation(theta, depth)
        except (TanlabError, ValueError) as exc:
            return ParamSample(float(theta), None, None, False, f"{type(exc).__name__}: {exc}")
        lam = (1 - eps) * cmath.exp(2j * math.pi * float(rn.theta))
        fmap = TangentMap(lam)
        cfg = config or ScanConfig.for_map(fmap)
        cyc = detect_cycle(fmap, cfg)
        flag, err = _siegel_flag(rn, quotient_bound, coeffs, max_denominator)
        if err:
            errors.append(err)
        return ParamSample(
            float(rn.theta),
            cyc.period if cyc else None,
            abs(cyc.multiplier) if cyc else None,
            flag,
            "; ".join(errors) or None,
        )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, samples))
    return [one(t) for t in samples]


def write_param_csv(samples, path):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["theta", "period", "|multiplier|", "siegel_flag"])
            for s in samples:
                out.writerow([
                    repr(float(s.theta)),
                    "" if s.period is None else s.period,
                    "" if s.multiplier_abs is None else repr(float(s.multiplier_abs)),
                    "true" if s.siegel_flag else "false",
                ])
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


DEFAULT_PALETTE = {
    UNDECIDED: (0, 0, 0),
    NEAR_POLE_ESCAPE: (255, 255, 255),
    SIEGEL_CANDIDATE: (232, 178, 36),
}
CYCLE_COLORS = [
    (31, 90, 168),
    (54, 160, 84),
    (196, 60, 60),
    (128, 80, 170),
    (40, 170, 180),
    (210, 120, 40),
    (120, 120, 120),
    (170, 60, 130),
]


def _palette_for(grid, palette):
    size = FIRST_CYCLE_CODE + len(grid.cycles)
    table = np.zeros((max(size, FIRST_CYCLE_CODE), 3), dtype=np.uint8)
    for code in range(table.shape[0]):
        if palette and code in palette:
            table[code] = palette[code]
        elif code in DEFAULT_PALETTE:
            table[code] = DEFAULT_PALETTE[code]
        else:
            table[code] = CYCLE_COLORS[(code - FIRST_CYCLE_CODE) % len(CYCLE_COLORS)]
    return table


def render(grid: ClassificationGrid, path, palette: Optional[dict] = None, png: bool = True) -> dict:
    """Write ``grid`` as a binary PPM (plus PNG if Pillow is present).

    One pixel per cell. A legend ``<stem>.legend.json`` goes next to the
    image. Returns the paths written.
    """
    path = Path(path)
    if path.suffix.lower() != ".ppm":
        path = path.with_suffix(".ppm")
    table = _palette_for(grid, palette)
    rgb = table[grid.codes]
    ny, nx = grid.codes.shape
    header = f"P6\n{nx} {ny}\n255\n".encode("ascii")
    legend = {
        "classes": {grid.label(c): [int(v) for v in table[c]] for c in range(table.shape[0])},
        "heuristic": True,
        "note": "SiegelCandidate is a heuristic class without a finite-time certificate",
        "lambda": [grid.lam.real, grid.lam.imag],
        "rect": list(grid.rect),
        "resolution": list(grid.resolution),
        "config": asdict(grid.config),
    }
    written = {"ppm": str(path)}
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(rgb).tobytes())
        legend_path = path.with_name(path.stem + ".legend.json")
        with open(legend_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(legend, fh, indent=2)
            fh.write("\n")
        written["legend"] = str(legend_path)
        if png:
            try:
                from PIL import Image
            except ImportError:
                Image = None
            if Image is not None:
                png_path = path.with_suffix(".png")
                Image.fromarray(rgb, "RGB").save(png_path, format="PNG")
                written["png"] = str(png_path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return written
