"""Classify the dynamical plane for a few parameters and write images.

Usage: python3 04_plane_scan.py [resolution]   (default 512; the golden-mean
scan at 512 takes a minute or two on one core)
"""
import sys

from tanlab.core import TangentMap
from tanlab.rotation import multiplier, named_quadratic
from tanlab.scan import attracting_cycles, render, scan_dynamical, scan_parameter, write_param_csv

res = int(sys.argv[1]) if len(sys.argv) > 1 else 512

# lam = 0.5: the origin attracts almost everything near it
half = scan_dynamical(TangentMap(0.5), (-1.2, -1.2, 1.2, 1.2), 256)
print("lam=0.5 :", half.histogram(), "symmetric:", half.is_symmetric())
render(half, "scan_half.ppm")

# lam = 2i: an attracting 2-cycle
f = TangentMap(2j)
for c in attracting_cycles(f):
    print(f"lam=2i  : period {c.period}, multiplier {c.multiplier:.4f}, points {c.points}")
render(scan_dynamical(f, (-3, -3, 3, 3), 256), "scan_2i.ppm")

# golden mean: a central Siegel candidate region, symmetric about 0
g = scan_dynamical(TangentMap(multiplier(named_quadratic("golden"))), (-2, -2, 2, 2), res)
print("golden  :", g.histogram(), "symmetric:", g.is_symmetric())
print("written :", render(g, "scan_golden.ppm"))

# radial probe just inside the unit circle
samples = scan_parameter((0, 1), 32, eps=0.05)
write_param_csv(samples, "param_scan.csv")
print("periods at eps=0.05:", sorted({s.period for s in samples if s.period}))
