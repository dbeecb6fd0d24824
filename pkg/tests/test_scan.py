import cmath
import json
import math

import numpy as np
import pytest

from tanlab.core import POLE, TangentMap, halfplane_radius_for_disk
from tanlab.errors import IoFailure
from tanlab.rotation import multiplier, named_quadratic
from tanlab.scan import (
    FIRST_CYCLE_CODE,
    ClassificationGrid,
    ScanConfig,
    attracting_cycles,
    classify_point,
    detect_cycle,
    orbit,
    render,
    scan_dynamical,
    scan_parameter,
    write_param_csv,
)

GOLDEN_LAM = multiplier(named_quadratic("golden"))


def test_orbit_attracting_fixed_point():
    f = TangentMap(0.5)
    assert abs(orbit(f, 0.3, 60)[-1]) < 1e-15


def test_orbit_deep_start_follows_asymptotic_value():
    f = TangentMap(0.5)
    first = orbit(f, 10j, 5)
    assert abs(first[0] - 0.5j * math.tanh(10)) < 1e-8
    # the remainder is the orbit of i*lam
    tail = orbit(f, 0.5j, 4)
    assert np.allclose(first[1:], tail, atol=1e-8)


def test_orbit_pole_hit():
    assert orbit(TangentMap(0.5), math.pi / 2, 10) == [POLE]


def test_detect_fixed_point():
    c = detect_cycle(TangentMap(0.5))
    assert c.period == 1 and c.representative == 0 and abs(c.multiplier - 0.5) < 1e-12


def test_detect_period_two():
    f = TangentMap(2j)
    c = detect_cycle(f)
    assert c.period == 2
    # independent check: the recurrence and the derivative product
    z0, z1 = c.points
    assert abs(f(f(z0)) - z0) < 1e-9 and abs(f(z0) - z1) < 1e-9
    d = 2j * (1 + np.tan(z0) ** 2) * 2j * (1 + np.tan(z1) ** 2)
    assert abs(c.multiplier - d) < 1e-9 and abs(c.multiplier) < 1


def test_golden_has_no_attracting_cycle():
    assert detect_cycle(TangentMap(GOLDEN_LAM)) is None


def test_symmetric_pair_of_fixed_points():
    cycles = attracting_cycles(TangentMap(1.2))
    assert len(cycles) == 2
    a, b = cycles
    assert abs(a.representative + b.representative) < 1e-12


def test_classify_point_examples():
    f = TangentMap(0.5)
    c = classify_point(f, 0.3)
    assert (c.kind, c.period, c.representative) == ("AttractedToCycle", 1, 0)
    assert classify_point(f, math.pi / 2).kind == "NearPoleEscape"
    assert classify_point(TangentMap(GOLDEN_LAM), 0.05).kind == "SiegelCandidate"


@pytest.mark.parametrize("lam", [0.3, 0.5, 0.9, 0.5 + 0.5j, -0.7j])
def test_origin_attracted_when_inside_unit_disk(lam):
    c = classify_point(TangentMap(lam), 0)
    assert (c.kind, c.period, c.representative) == ("AttractedToCycle", 1, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(max_iter=0)
    with pytest.raises(ValueError):
        ScanConfig.for_map(TangentMap(1), escape_im=0.1)
    assert ScanConfig.for_map(TangentMap(1)).escape_im == 17


def test_escape_soundness():
    rng = np.random.default_rng(7)
    for lam in (0.5, 2j, GOLDEN_LAM, 3 - 1j):
        f = TangentMap(lam)
        cfg = ScanConfig.for_map(f)
        R = halfplane_radius_for_disk(f, 0.25 * abs(lam)).R
        assert cfg.escape_im >= R
        y = cfg.escape_im + rng.exponential(5, 1000)
        z = rng.uniform(-10, 10, 1000) + 1j * y * rng.choice([-1, 1], 1000)
        fz = f(z)
        target = np.where(z.imag > 0, 1j * lam, -1j * lam)
        assert np.all(np.abs(fz - target) <= 0.25 * abs(lam))


@pytest.fixture(scope="module")
def half_grid():
    return scan_dynamical(TangentMap(0.5), (-1.2, -1.2, 1.2, 1.2), 256)


def test_scan_half_dominated_by_fixed_point(half_grid):
    assert len(half_grid) == 256 * 256
    assert half_grid.cycles[0].representative == 0
    assert half_grid.fraction(FIRST_CYCLE_CODE) >= 0.99


def test_scan_symmetry_and_determinism(half_grid):
    assert half_grid.is_symmetric()
    again = scan_dynamical(TangentMap(0.5), (-1.2, -1.2, 1.2, 1.2), 256, threads=4)
    assert again.tobytes() == half_grid.tobytes()


def test_scan_single_cell_and_rectangular():
    g = scan_dynamical(TangentMap(0.5), (-1, -1, 1, 1), 1)
    assert g.codes.shape == (1, 1) and g.cell(0, 0).kind == "AttractedToCycle"
    g = scan_dynamical(TangentMap(0.5), (-1, -0.5, 1, 0.5), (7, 3))
    assert g.codes.shape == (3, 7)
    centers = g.centers()
    assert centers[0, 0].imag > centers[-1, 0].imag  # row 0 is the top edge
    assert np.allclose(centers, -centers[::-1, ::-1], atol=1e-15)
    with pytest.raises(ValueError):
        scan_dynamical(TangentMap(0.5), (-1, -1, 1, 1), 0)


def test_scan_golden_symmetric_siegel_region():
    g = scan_dynamical(TangentMap(GOLDEN_LAM), (-2, -2, 2, 2), 128)
    assert g.is_symmetric()
    assert g.cell(63, 63).kind == g.cell(64, 64).kind == "SiegelCandidate"
    # the cells around the origin form one candidate block
    assert np.all(g.codes[56:72, 56:72] == g.codes[64, 64])


def test_scan_period_two_symmetric():
    g = scan_dynamical(TangentMap(2j), (-2, -2, 2, 2), 64)
    assert g.is_symmetric()
    assert any(c.period == 2 for c in g.cycles)


def test_param_scan_inside_disk():
    samples = scan_parameter((0, 1), 64, eps=0.5)
    assert len(samples) == 64
    assert all(s.period == 1 and abs(s.multiplier_abs - 0.5) < 1e-9 for s in samples)


def test_param_scan_flags():
    golden, half = scan_parameter(thetas=[named_quadratic("golden"), "0.5"], eps=0.05)
    assert golden.siegel_flag and golden.error is None
    assert not half.siegel_flag and "ResonantMultiplier" in half.error


def test_param_csv(tmp_path):
    samples = scan_parameter((0, 1), 4, eps=0.5)
    path = tmp_path / "p.csv"
    write_param_csv(samples, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "theta,period,|multiplier|,siegel_flag"
    assert lines[1].split(",")[0] == "0.125"


def _grid_with_four_classes():
    f = TangentMap(0.5)
    cfg = ScanConfig.for_map(f)
    base = scan_dynamical(f, (-1, -1, 1, 1), 2, cfg)
    codes = np.array([[0, 1], [2, FIRST_CYCLE_CODE]], dtype=np.int16)
    return ClassificationGrid(base.lam, base.rect, (2, 2), codes, base.iterations, base.cycles, cfg)


def _ppm_pixels(path):
    data = path.read_bytes()
    header, body = data.split(b"\n255\n", 1)
    assert header.startswith(b"P6\n")
    return np.frombuffer(body, dtype=np.uint8).reshape(-1, 3)


def test_render_distinct_colors_and_legend(tmp_path):
    grid = _grid_with_four_classes()
    written = render(grid, tmp_path / "g.ppm")
    px = _ppm_pixels(tmp_path / "g.ppm")
    assert len({tuple(p) for p in px}) == 4
    legend = json.loads((tmp_path / "g.legend.json").read_text())
    assert legend["heuristic"] is True
    assert set(written) >= {"ppm", "legend"}


def test_render_deterministic(tmp_path, half_grid):
    render(half_grid, tmp_path / "a.ppm")
    render(half_grid, tmp_path / "b.ppm")
    assert (tmp_path / "a.ppm").read_bytes() == (tmp_path / "b.ppm").read_bytes()
    assert (tmp_path / "a.legend.json").read_bytes() == (tmp_path / "b.legend.json").read_bytes()


def test_render_unwritable(tmp_path):
    grid = _grid_with_four_classes()
    with pytest.raises(IoFailure):
        render(grid, tmp_path / "missing" / "dir" / "g.ppm")
