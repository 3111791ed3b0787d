"""Compare the quantum divergence families on one non-commuting qubit pair.

Run with ``python3 demos/01_divergences.py``.
"""

import math

import numpy as np

from inconclusive import RenyiPair, measured_relative_entropy

rho = np.array([[0.5, 0.25], [0.25, 0.5]])
sigma = np.diag([0.75, 0.25])
pair = RenyiPair(rho, sigma)

print("order    Petz        sandwiched")
for s in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0):
    print(f"{s:5.2f}  {pair.petz(s)[0]:.8f}  {pair.sandwiched(s)[0]:.8f}")

# The sandwiched curve sits below the Petz curve and both meet at s = 1.
print()
print(f"relative entropy     {pair.relative_entropy:.10f}")
print(f"measured (best PVM)  {measured_relative_entropy(rho, sigma).value:.10f}")
print(f"D* (reverse limit)   {pair.d_star:.10f}  vs 0.5 ln 1.5 = {0.5 * math.log(1.5):.10f}")
print(f"-log fidelity        {-math.log(pair.fidelity):.10f}")
print(f"Chernoff             {pair.chernoff:.10f}")
print(f"max-relative entropy {pair.max_relative_entropy:.10f}")
