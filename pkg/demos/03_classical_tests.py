"""Evaluate three-outcome classical tests exactly by summing over types."""

import math

from inconclusive import ExponentRegions, bernoulli
from inconclusive.types_engine import eval_reject_test, eval_stein_test

BITS = 1 / math.log(2)
P, Q = bernoulli(0.9), bernoulli(0.2)
reg = ExponentRegions(P, Q)

print("Stein-type test, delta = n^(-1/3); exponents in bits")
print("   n   beta_bar  alpha_bar  pi_P      pi_Q")
for n in (200, 500, 1000, 2000, 5000):
    st = eval_stein_test(P, Q, n)
    print(f"{n:5d}  {st.exponent('beta_bar') * BITS:.4f}    {st.exponent('alpha_bar') * BITS:.4f}"
          f"     {math.exp(st.log_pi_P):.6f}  {math.exp(st.log_pi_Q):.6f}")
print(f"limits: {reg.D('rs') * BITS:.4f} and {reg.D('sr') * BITS:.4f} (approached slowly)\n")

k = l = 0.1 / BITS
st = eval_reject_test(P, Q, 2000, k, l)
print("reject test, K = L = 0.1 bits, n = 2000")
for name, v in st.exponents().items():
    print(f"  {name:15s} {v * BITS:.4f} bits")
