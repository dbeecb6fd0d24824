"""Rank a handful of rotation numbers by how stable their disks look.

Nothing here certifies a bounded disk; the report says so.
"""
import json

import mpmath

from tanlab.rotation import continued_fraction, from_quotients, named_quadratic
from tanlab.siegel import SiegelConfig, bounded_disk_scan

with mpmath.workdps(80):
    prefix = continued_fraction(mpmath.e - 2, 14).quotients

candidates = [named_quadratic("golden"), named_quadratic("sqrt2m1")]
candidates += [(f"e-2:{k}", from_quotients(prefix[:k], tail=[1])) for k in (5, 8, 11)]
candidates.append(("1/3", from_quotients([3])))  # resonant on purpose

report = bounded_disk_scan(candidates, SiegelConfig(), [0.9, 0.95, 0.99, 0.995])
for e in report.entries:
    print(f"{e.label:10s} {str(e.verdict):16s} score={e.score}  {e.error or ''}")
print(report.note)
with open("bounded_scan.json", "w", encoding="utf-8") as fh:
    json.dump(report.to_dict(), fh, indent=2)
