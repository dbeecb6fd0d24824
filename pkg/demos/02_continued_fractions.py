"""Continued fractions, convergents and Brjuno sums of a few rotation numbers."""
import mpmath

from tanlab.rotation import (
    bounded_type_prefix,
    brjuno_partial,
    continued_fraction,
    convergents,
    from_quotients,
    multiplier,
    named_quadratic,
)

golden = named_quadratic("golden", depth=30)
print("golden quotients :", golden.quotients[:12], "...")
print("convergents      :", convergents(golden)[:6])

silver = named_quadratic("sqrt2m1", depth=20)
print("sqrt2-1 quotients:", silver.quotients[:12], "...")

# e - 2 has unbounded quotients 1, 2, 1, 1, 4, 1, 1, 6, ...
with mpmath.workdps(80):
    e2 = continued_fraction(mpmath.e - 2, 12)
print("e-2 quotients    :", e2.quotients, " max so far:", bounded_type_prefix(e2)[0])

# a double only carries so many quotients; exact quadratics do not run out
print("golden as float  :", continued_fraction(0.6180339887498949, 45).quotients[36:])

# rationals terminate and are flagged
quarter = continued_fraction(0.25, 10)
print("0.25             :", quarter.quotients, "rational =", quarter.rational)

# Brjuno partial sums
for n in (1, 2, 5, 10, 20):
    print(f"B_{n:<2d} golden = {brjuno_partial(golden, n).value:.6f}")

# bounded-type numbers from a prefix and a periodic tail
rn = from_quotients([1, 2, 1, 1, 4], tail=[1])
print("[0; 1,2,1,1,4,1,1,...] =", mpmath.nstr(rn.theta, 20))
print("multiplier of golden:", multiplier(golden))
