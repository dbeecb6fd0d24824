"""Walk through f(z) = lam * tan(z): values, poles, the Moebius factorisation,
half-plane strips and curve lifting."""
import math

import numpy as np

from tanlab.core import (
    POLE,
    Polyline,
    TangentMap,
    decompose,
    evaluate,
    halfplane_radius_for_disk,
    inverse_branch,
    lift_curve,
    line_image_circle,
)
from tanlab.errors import OmittedValue

f = TangentMap(1.0)
print("f(pi/4)      =", evaluate(f, math.pi / 4))
print("f(pi/2)      =", evaluate(f, math.pi / 2))  # POLE sentinel
assert evaluate(f, math.pi / 2) is POLE
print("asymptotic   =", f.asymptotic_values)

# f = M1(exp(2iz)); check it on a few points
M1, M2 = decompose(f)
z = np.array([0.3 + 0.2j, -1.0 + 1.5j, 2.0 - 0.7j])
print("max |M1(exp(2iz)) - f(z)|:", max(abs(M1(np.exp(M2(p))) - evaluate(f, p)) for p in z))

# the line Im z = 1 goes to a circle around i
center, radius = line_image_circle(f, 1.0)
print(f"Im z = 1  ->  circle center {center:.5f}, radius {radius:.5f}")

# how deep must we go so that f lands within 0.5 of +-i?
R = halfplane_radius_for_disk(f, 0.5).R
print(f"strip height for r = 0.5: R = {R:.6f}  (log(5)/2 = {0.5 * math.log(5):.6f})")

# preimages come in translates by pi, and +-i have none
print("branches of arctan(1):", [round(inverse_branch(f, 1.0, k).real, 6) for k in range(-1, 2)])
try:
    inverse_branch(f, 1j)
except OmittedValue as exc:
    print("omitted:", exc)

# lift the segment [1, 2] from two different preimages of 1
seg = Polyline(np.linspace(1, 2, 9))
for base in (math.pi / 4, math.pi / 4 + math.pi):
    end = lift_curve(f, seg, base).points[-1]
    print(f"lift from {base:.5f} ends at {end.real:.5f}")

# a loop around the omitted value i lifts to a path that is not closed
loop = Polyline(1j + 0.5 * np.exp(1j * np.linspace(0, 2 * np.pi, 200)))
lifted = lift_curve(f, loop, inverse_branch(f, loop.points[0]))
print("loop around i: lift moves by", np.round(lifted.points[-1] - lifted.points[0], 9))
