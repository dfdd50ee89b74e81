#!/usr/bin/env python3
"""Joint fluctuations of the crossing count and the stress.

In the degree-convergent regime (t delta^d = c) the centered pair
  F1 = (crossings - mean) / (t^(7/2) delta^(2d+2)),
  F2 = (stress    - mean) / t^(3/2)
approaches a bivariate normal vector.  The limiting covariance matrix for the
cube window is known in closed form:
  Var F1 -> (2 c_d^2 + c_d'/c) / 8
  Cov    -> (c_d / 2) * int_W S1(v) dv
  Var F2 -> int_W S1(v)^2 dv
with S1 the first-order stress profile.  This demo estimates the sample
covariance and the marginal shapes and prints them against the predictions.
"""

import numpy as np
from scipy import stats as sps

from rggcross import (ExperimentConfig, RegimeSpec, c_d_closed,
                      c_d_prime_closed, cube_stress_integrals,
                      run_replications)

T = 600.0
C = 1.0
REPLICATIONS = 1200

cfg = ExperimentConfig(
    regime=RegimeSpec.thermodynamic(C, 3),
    t_values=(T,),
    replications=REPLICATIONS,
    seed=21,
    record_stress=True,
    threads=2,
)
delta = cfg.regime.delta_for(T)
print(f"thermodynamic regime: t={T:g}, c={C}, delta={delta:.4f}, "
      f"{REPLICATIONS} replications (takes a minute or two)")

records = run_replications(cfg)
F = np.array([[r.f1, r.f2] for r in records])
cov = np.cov(F.T)

cd = c_d_closed(3)
cdp = c_d_prime_closed(3)
s1_int, s1_sq_int = cube_stress_integrals(3, outer_grid=16,
                                          inner_points=2 ** 16)
pred = np.array([[(2 * cd * cd + cdp / C) / 8.0, 0.5 * cd * s1_int],
                 [0.5 * cd * s1_int, s1_sq_int]])

print("\nsample covariance of (F1, F2) vs limit prediction:")
for i in range(2):
    for j in range(2):
        gap = cov[i, j] / pred[i, j] - 1.0
        print(f"  [{i}{j}] sample {cov[i, j]:>9.5f}   limit {pred[i, j]:>9.5f}"
              f"   ratio-1 {gap:+.1%}")
print("(the shortfall is the O(delta) boundary correction at this t)")

corr = cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1])
print(f"\ncorrelation(F1, F2) = {corr:.3f} - crossings and stress fluctuate "
      "together,\nboth driven by the same point-count fluctuations")

print("\nmarginal shape (normal limit: skew 0, excess kurtosis 0):")
for k, name in enumerate(("F1", "F2")):
    x = F[:, k]
    print(f"  {name}: skew {sps.skew(x):+.3f}   "
          f"excess kurtosis {sps.kurtosis(x):+.3f}")
print("the crossing marginal keeps a visible right skew at small t; "
      "it decays like O(delta)")
