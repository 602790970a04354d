"""A short tour of the two fractional norms on (0, 1).

Run with ``python3 demos/norms_tour.py``. The script computes the
interpolation norm of sin(pi x) on a sequence of meshes, compares it with
the Fourier value, then evaluates the Slobodetskij seminorm and the
boundary-weighted term for a few standard functions.
"""

import math

from fracsobolev import (Interval, interp_norm_sq, interpolate_p1, parse_expr, seminorm_sq,
                         tilde_norm_sq, uniform_mesh, weighted_sq)

UNIT = Interval(0.0, 1.0)

print("Interpolation norm of sin(pi x) at order 1/2; the Fourier value is pi^2/4.")
u = parse_expr("sin(pi*x)")
for n in (16, 64, 256, 1024):
    value = interp_norm_sq(interpolate_p1(u, uniform_mesh(UNIT, n), dirichlet=True), 0.5)
    print(f"  {n:5d} elements: {value:.8f}   error {abs(value - math.pi ** 2 / 4):.2e}")

print("\nThe seminorm of x is 1 at order 1/2 and 8/15 at order 1/4:")
for sigma in (0.5, 0.25):
    print(f"  sigma={sigma}: {seminorm_sq(parse_expr('x'), UNIT, sigma):.12f}")

print("\nThe weighted term int u^2 / dist(x, boundary):")
for text, exact in (("family:hat", 0.25), ("x*(1-x)", 11 / 96)):
    print(f"  {text:12s} {weighted_sq(parse_expr(text), UNIT, 0.5):.12f}  (exact {exact:.12f})")

print("\nA full report for the hat function:")
report = tilde_norm_sq(parse_expr("family:hat"), UNIT, 0.5)
for key, value in report.as_dict().items():
    print(f"  {key}: {value}")
