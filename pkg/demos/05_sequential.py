"""Run the adaptive protocol that switches measurement on the sign of the running log-likelihood."""

import math

import numpy as np

from inconclusive.sequential import ProtocolConfig, estimate_statistics, optimal_measurements

LN2 = math.log(2)
th = math.pi / 8
rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
rho = rot @ np.diag([0.9, 0.1]) @ rot.T
sigma = np.diag([0.2, 0.8])

pair = optimal_measurements(rho, sigma)
print(f"measured values: {pair.value_rho / LN2:.4f} and {pair.value_sigma / LN2:.4f} bits")
for n in (50, 100, 200, 400):
    cfg = ProtocolConfig.build(pair, n, 0.3 * LN2, seed=24301, trials=20_000)
    rep = estimate_statistics(pair, cfg)
    r, s = rep.under_rho, rep.under_sigma
    print(f"n={n:4d}  wrong {r.wrong:3d}/{s.wrong:3d}  inconclusive {r.inconclusive:5d}/{s.inconclusive:5d}"
          f"  S_n/n {r.mean_rate / LN2:+.3f}/{s.mean_rate / LN2:+.3f} bits"
          f"  martingale scale {r.drift.martingale_part_scale:.4f}")
