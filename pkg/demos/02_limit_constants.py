"""The large-degree limit constants of the four ensembles.

For Kac polynomials the expected lemniscate length converges to a constant
given by a unit-disk integral; for the binomial (Kostlan) ensemble the
length decays like 1/sqrt(n) with an explicit limit of sqrt(n) E|len|; the
1/k! (Weyl) ensemble converges to a constant of its own.  The Kostlan and
Weyl limit integrals are the same integral in different coordinates, which
this script demonstrates numerically, along with the finite-n sweeps
approaching each limit.

The reciprocal-binomial ensemble is deliberately absent from the constant
table: its expected length tends to a constant (about 7.3) rather than
decaying like 1/sqrt(n) -- run the sweep below to see the plateau.
"""

import math

from lemnilab import (
    EnsembleSpec,
    expected_length,
    kac_limit_constant,
    kostlan_limit_constant,
    weyl_limit_constant,
)

print("limit constants")
print(f"  kac      lim E|len|           = {kac_limit_constant():.10f}")
print(f"  kostlan  lim sqrt(n) E|len|   = {kostlan_limit_constant():.10f}")
print(f"  weyl     lim E|len|           = {weyl_limit_constant():.10f}")
print("  (the last two agree: same integral, different parametrization)")

print("\nkac finite-n sweep (slow sqrt(n) approach to the limit):")
for n in (10, 25, 50, 100, 200, 400):
    e = expected_length(EnsembleSpec("kac", n))
    print(f"  n={n:>4}  E|len| = {e.value: .5f}   gap to limit {kac_limit_constant() - e.value: .5f}")

print("\nkostlan sweep, rescaled by sqrt(n):")
for n in (9, 25, 100, 400):
    e = expected_length(EnsembleSpec("kostlan", n))
    print(f"  n={n:>4}  sqrt(n) E|len| = {math.sqrt(n) * e.value:.5f}")

print("\nweyl sweep (fast convergence):")
for n in (10, 20, 30, 60):
    e = expected_length(EnsembleSpec("weyl", n))
    print(f"  n={n:>4}  E|len| = {e.value:.7f}")

print("\nreciprocal-binomial sweep (plateau, not 1/sqrt(n) decay):")
for n in (10, 25, 50, 100):
    e = expected_length(EnsembleSpec("recip_binom", n))
    print(f"  n={n:>4}  E|len| = {e.value:.5f}   sqrt(n) E|len| = {math.sqrt(n) * e.value:.3f}")
