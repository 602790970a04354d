"""Whole-domain interpolation norms against sums over subdomains.

For a function that vanishes at the cut points, the script compares the
whole-domain norm (lhs), the sum of norms of the zero extensions of its
pieces, and the sum of the subdomain norms. The local sum always dominates.
The zero-extension sum can fall below lhs, and sin(2 pi x) split at 1/2 is
the simplest case.
"""

import numpy as np

from fracsobolev import align_partition, uniform_mesh, Interval
from fracsobolev import experiments as ex

mesh = uniform_mesh(Interval(0.0, 1.0), 1024)
for cuts, text in (([0.5], "sin(2*pi*x)"), ([0.5], "x*(1-x)*(x-0.5)^2"),
                   ([0.25, 0.5, 0.75], "sin(4*pi*x)")):
    rec = ex.run_partition_study(text, align_partition(mesh, cuts))
    o = rec.observables
    print(f"{text:22s} N={len(cuts) + 1}: lhs={o['lhs']:.4f} zero-ext sum={o['rhs_zero_ext']:.4f} "
          f"local sum={o['rhs_local']:.4f}")

print("\nIndependent random pieces on each half:")
part = align_partition(mesh, [0.5])
rng = np.random.default_rng(7)
for i in range(5):
    u = ex.random_piecewise_function(rng, part)
    o = ex.run_partition_study(u, part).observables
    print(f"  sample {i}: lhs/zero-ext={o['lhs'] / o['rhs_zero_ext']:.4f} "
          f"lhs/local={o['lhs'] / o['rhs_local']:.4f}")
