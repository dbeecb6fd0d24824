import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from oracles import gmpy_to_mp, golden_lambda, schroeder_by_composition, tan_taylor
from tanlab.core import TangentMap
from tanlab.errors import InsufficientData, OrbitEscaped, ResonantMultiplier, SeriesDivergence
from tanlab.rotation import continued_fraction, from_quotients, named_quadratic
from tanlab.siegel import (
    SiegelConfig,
    Verdict,
    bounded_disk_scan,
    conformal_radius,
    invariance_defect,
    linearizer,
    orbit_rotation_number,
    schroeder_residual,
    tan_series,
    trace_invariant_curve,
    unboundedness_indicators,
)

GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.fixture(scope="module")
def golden200():
    return linearizer(named_quadratic("golden"), 200, 50)


def test_tan_series_exact():
    t = tan_series(9)
    assert t[1] == 1 and t[3] == Fraction(1, 3)
    assert t[5] == Fraction(2, 15) and t[7] == Fraction(17, 315)
    assert t[0] == t[2] == t[4] == t[8] == 0
    ref = tan_taylor(9)
    with mpmath.workdps(60):
        for n in range(10):
            assert abs(mpmath.mpf(t[n].numerator) / t[n].denominator - ref[n]) < mpmath.mpf(10) ** -50


def test_linearizer_matches_composition_oracle(golden200):
    ref = schroeder_by_composition(golden_lambda(60), 30, dps=60)
    with mpmath.workdps(60):
        for n in range(1, 31):
            assert abs(gmpy_to_mp(golden200.coefficient(n)) - ref[n - 1]) < mpmath.mpf(10) ** -20


def test_c3_closed_form(golden200):
    with mpmath.workdps(60):
        lam = golden_lambda(60)
        assert abs(gmpy_to_mp(golden200.coefficient(3)) - 1 / (3 * (lam**2 - 1))) < mpmath.mpf(10) ** -25


def test_even_coefficients_exactly_zero(golden200):
    assert golden200.coefficient(1) == 1
    assert all(golden200.coefficient(n) == 0 for n in range(2, 201, 2))


def test_arbitrary_unit_multiplier():
    lam = complex(math.cos(1.0), math.sin(1.0))
    s = linearizer(lam, 11)
    ref = schroeder_by_composition(mpmath.mpc(lam), 11, dps=60)
    with mpmath.workdps(60):
        # the double lam is taken as exact on both sides
        assert abs(gmpy_to_mp(s.coefficient(11)) - ref[10]) < mpmath.mpf(10) ** -40


def test_schroeder_residual(golden200):
    assert schroeder_residual(golden200, 0.5, 256) < 1e-10


def test_scaled_map():
    # phi for lam tan(s z)/s is phi_1(s w)/s
    s = 0.5
    base = linearizer(named_quadratic("golden"), 101)
    scaled = linearizer(named_quadratic("golden"), 101, scale=s)
    for n in (3, 5, 21, 101):
        ratio = gmpy_to_mp(scaled.coefficient(n)) / gmpy_to_mp(base.coefficient(n))
        assert abs(ratio - mpmath.mpf(s) ** (n - 1)) < 1e-30
    assert schroeder_residual(scaled, 0.3) < 1e-12


def test_resonance_detected():
    with pytest.raises(ResonantMultiplier) as exc:
        linearizer(continued_fraction("0.5", 10), 10)
    assert exc.value.n == 3
    with pytest.raises(ResonantMultiplier) as exc:
        linearizer(from_quotients([3]), 10)  # theta = 1/3
    assert exc.value.n == 4
    with pytest.raises(ValueError):
        linearizer(0.5, 10)


def test_radius_stable_between_200_and_400(golden200):
    r200, _ = conformal_radius(golden200)
    r400, _ = conformal_radius(linearizer(named_quadratic("golden"), 400))
    assert 0 < r200 < math.inf
    assert abs(r200 - r400) / r400 < 0.05


def test_radius_insufficient():
    with pytest.raises(InsufficientData):
        conformal_radius(linearizer(named_quadratic("golden"), 10))


def test_radius_collapses_near_rational():
    radii = []
    for eps in ("1e-3", "1e-6", "1e-9"):
        with mpmath.workdps(60):
            x = mpmath.mpf(5) / 8 + mpmath.mpf(eps)
        radii.append(conformal_radius(linearizer(continued_fraction(x, 40), 200))[0])
    assert radii[0] > radii[1] > radii[2]
    assert radii[2] < 0.25 * conformal_radius(linearizer(named_quadratic("golden"), 200))[0]


def test_small_trace_is_nearly_a_circle(golden200):
    r, _ = conformal_radius(golden200)
    curve = trace_invariant_curve(golden200, 0.01, 256)
    mod = np.abs(curve.points)
    assert np.max(np.abs(mod - 0.01 * r)) < 1e-3 * 0.01 * r
    assert curve.closed


def test_trace_symmetric_nested_invariant(golden200):
    inner = trace_invariant_curve(golden200, 0.5, 512)
    outer = trace_invariant_curve(golden200, 0.8, 512)
    # odd map: the traces are symmetric under z -> -z (half a turn of samples)
    assert np.max(np.abs(np.roll(inner.points, 256) + inner.points)) < 1e-12
    assert np.abs(inner.points).max() < np.abs(outer.points).min() * 2
    assert np.abs(inner.points).max() < np.abs(outer.points).max()
    assert invariance_defect(golden200, inner) < 1e-10
    assert invariance_defect(golden200, outer) < 1e-10


def test_trace_refuses_outside_reliable_zone(golden200):
    with pytest.raises(SeriesDivergence):
        trace_invariant_curve(golden200, 0.999, 256)
    with pytest.raises(SeriesDivergence) as exc:
        trace_invariant_curve(golden200, 0.99, 256)  # 200 terms are not enough here
    assert exc.value.tail_ratio > 1e-8
    with pytest.raises(ValueError):
        trace_invariant_curve(golden200, 1.5, 256)


def test_indicators_reject_non_unit_multiplier():
    with pytest.raises(ValueError):
        unboundedness_indicators(0.9, [0.5, 0.6, 0.7])
    with pytest.raises(ValueError):
        unboundedness_indicators(named_quadratic("golden"), [0.9, 0.5, 0.7])


def test_indicators_small_series_short_rhos(golden200):
    cfg = SiegelConfig(coeffs=200, samples=1024, extend=False)
    est = unboundedness_indicators(named_quadratic("golden"), [0.3, 0.5, 0.7], cfg, series=golden200)
    assert est.verdict is not Verdict.BOUNDED_LIKELY
    assert all(b > a for a, b in zip(est.extents, est.extents[1:]))
    assert all(b < a for a, b in zip(est.image_gaps, est.image_gaps[1:]))
    assert est.heuristic


def test_indicators_no_extension_is_inconclusive(golden200):
    cfg = SiegelConfig(coeffs=200, samples=1024, extend=False)
    est = unboundedness_indicators(named_quadratic("golden"), [0.9, 0.95, 0.995], cfg, series=golden200)
    assert est.verdict is Verdict.INCONCLUSIVE
    assert "SeriesDivergence" in est.diagnostics["reason"]


@pytest.mark.slow
def test_indicators_extend_series(tmp_path):
    cfg = SiegelConfig(coeffs=200, samples=2048)
    est = unboundedness_indicators(named_quadratic("golden"), [0.5, 0.9, 0.95, 0.995], cfg)
    assert est.verdict is Verdict.UNBOUNDED_LIKELY
    assert est.n_coeffs > 200 and est.diagnostics["coeffs_requested"] == 200
    est.to_json(tmp_path / "r.json")
    est.write_traces_csv(tmp_path / "t.csv")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["verdict"] == "UnboundedLikely" and data["heuristic"] is True
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "rho,t,re,im" and len(lines) == 1 + 4 * 2048


def test_orbit_rotation_number_golden(golden200):
    r, _ = conformal_radius(golden200)
    f = TangentMap(golden200.lam)
    for frac in (0.3, 0.6):
        assert abs(orbit_rotation_number(f, frac * r, 10_000) - GOLDEN) < 1e-3
    exact = orbit_rotation_number(f, 0.3 * r, 200, series=golden200)
    assert abs(exact - GOLDEN) < 1e-10
    with pytest.raises(ValueError):
        orbit_rotation_number(f, 0.3 * r, 0)


def test_orbit_rotation_number_escape():
    f = TangentMap(complex(golden_lambda(30)))
    with pytest.raises(OrbitEscaped) as exc:
        orbit_rotation_number(f, math.pi / 2 - 1e-4, 1000, bound=5.0)
    assert exc.value.step == 1


def test_bounded_scan_empty_and_failures():
    report = bounded_disk_scan([], SiegelConfig())
    assert report.entries == [] and report.heuristic
    cfg = SiegelConfig(coeffs=64, samples=256, extend=False)
    # huge quotients sit right next to resonance at fixed precision
    liouville = from_quotients([1, 10**15, 1], tail=[1])
    report = bounded_disk_scan([("liouville", liouville), continued_fraction("0.5", 5)], cfg, [0.3, 0.5, 0.7])
    by_label = {e.label: e for e in report.entries}
    assert by_label["liouville"].verdict in (None, "Inconclusive") or by_label["liouville"].error
    assert by_label["0.5"].verdict is None and "ResonantMultiplier" in by_label["0.5"].error
    assert all(e.verdict != "BoundedLikely" for e in report.entries)
    d = report.to_dict()
    assert d["heuristic"] is True and "heuristic" in d["note"]
