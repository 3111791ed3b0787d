"""Watch pinched k-copy rates climb toward the sandwiched divergence."""

import numpy as np

from inconclusive.pinching import pinched_renyi_rate

rho = np.array([[0.5, 0.25], [0.25, 0.5]])
sigma = np.diag([0.75, 0.25])

for s in (0.7, 1.5):
    print(f"s = {s}")
    print(" k   rate        target      gap        2 log(k+1)/k")
    for k in range(1, 9):
        r = pinched_renyi_rate(s, rho, sigma, k)
        print(f"{k:2d}   {r.rate:.8f}  {r.target:.8f}  {r.gap:.8f}  {r.bound:.6f}")
    print()
