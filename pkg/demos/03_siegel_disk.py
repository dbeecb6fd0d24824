"""Linearise f at 0 for the golden-mean multiplier, trace invariant curves and
look at how they behave as they approach the edge of the disk."""
import math

import numpy as np

from tanlab.core import TangentMap
from tanlab.rotation import named_quadratic
from tanlab.siegel import (
    SiegelConfig,
    conformal_radius,
    invariance_defect,
    linearizer,
    orbit_rotation_number,
    schroeder_residual,
    trace_invariant_curve,
    unboundedness_indicators,
)

theta = named_quadratic("golden")
series = linearizer(theta, 400, precision_digits=50)
r, fit = conformal_radius(series)
print(f"c_3 = {complex(series.coefficient(3)):.6f}")
print(f"radius estimate {r:.4f} (fit residual {fit:.3f})")
print(f"Schroeder residual at half the radius: {schroeder_residual(series):.1e}")

for rho in (0.2, 0.5, 0.8):
    curve = trace_invariant_curve(series, rho, 512)
    print(f"rho={rho}: max|z| = {np.abs(curve.points).max():.4f}, "
          f"invariance defect {invariance_defect(series, curve):.1e}")

f = TangentMap(series.lam)
print("orbit rotation number:", orbit_rotation_number(f, 0.3 * r, 10_000),
      " target:", (math.sqrt(5) - 1) / 2)

# the full experiment: extent grows and the image closes in on +-i lam
est = unboundedness_indicators(theta, [0.9, 0.95, 0.99, 0.995], SiegelConfig())
for rho, e, g in zip(est.rhos, est.extents, est.image_gaps):
    print(f"rho={rho:<6} extent {e:8.4f}   gap to +-i lam {g:.2e}")
print("verdict:", est.verdict.value, "(heuristic)")
est.to_json("siegel_golden.json")
est.write_traces_csv("siegel_golden_traces.csv")
