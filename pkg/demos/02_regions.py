"""Trace the exponent regions for the Bernoulli(0.9) / Bernoulli(0.2) pair.

Prints, in bits, the deterministic Hoeffding curve, the rectangle reached
when abstaining is allowed with vanishing exponent, and the one-sided
boundary reached when only one inconclusive exponent is constrained.
"""

import math

import numpy as np

from inconclusive import ExponentRegions, bernoulli

BITS = 1 / math.log(2)
reg = ExponentRegions(bernoulli(0.9), bernoulli(0.2))

print(f"D(P||Q) = {reg.D('rs') * BITS:.6f} bits, D(Q||P) = {reg.D('sr') * BITS:.6f} bits")
print(f"D_plus  = {reg.d_plus() * BITS:.6f} bits\n")
print("    A     deterministic  rectangle  one-sided")
for a in np.linspace(0.0, reg.d_plus(), 9):
    det = reg.hoeffding(a, "sr") if a <= reg.D("sr") else 0.0
    rect = reg.D("rs") if a <= reg.D("sr") else 0.0
    print(f"{a * BITS:7.4f}   {det * BITS:10.6f}  {rect * BITS:9.6f}  {reg.onesided_boundary(a) * BITS:9.6f}")

# Pushing past the one-sided boundary costs a positive conclusiveness exponent.
a = reg.D("sr") + 0.2
b0 = reg.onesided_boundary(a)
for b in (b0 - 0.05, b0, b0 + 0.05, b0 + 0.2):
    print(f"A={a * BITS:.3f} B={b * BITS:.3f} bits -> K* = {reg.min_conclusiveness_exponent(a, b) * BITS:.6f} bits")

print("\nsymmetric setting, average vs maximal error exponent:")
for z in (0.0, 0.5, 1.0, 2.0, 5.0):
    zn = z / BITS
    print(f"Z={z:4.1f}  {reg.symmetric_boundary(zn) * BITS:.6f}  {reg.symmetric_boundary(zn, 'maximal') * BITS:.6f}")
