#!/usr/bin/env python3
"""How large are the finite-size corrections at desk scale?

All the limit formulas carry (1 + O(delta)) factors from two sources: the
window boundary clips crossing configurations, and the fiber direction loses
a sliver of pair volume.  This demo measures the gaps directly at a few
intensities so the tolerances used in statistical comparisons can be judged.

For the edge count the correction is even available in closed form: the pair
volume of the cube is

  I(delta) = delta^d * sum_k C(d,k) (-delta)^k pi^((d-k)/2) / Gamma((d+k)/2+1),

so E[#edges] = (t^2/2) I(delta) exactly, versus the asymptotic
t c kappa_d / 2.
"""

import numpy as np

from rggcross import (ExperimentConfig, FullPlane, RegimeSpec,
                      cube_pair_volume, limit_intensity, run_replications,
                      unit_ball_volume)

C = 1.0
print("edge count, thermodynamic regime (t delta^3 = 1):")
print(f"{'t':>6} {'delta':>7} {'exact/asymptotic':>17}")
for t in (250.0, 1000.0, 4000.0, 16000.0):
    delta = (C / t) ** (1.0 / 3.0)
    exact = t * t / 2.0 * cube_pair_volume(delta, 3)
    asym = t * C * unit_ball_volume(3) / 2.0
    print(f"{t:>6.0f} {delta:>7.4f} {exact / asym:>17.4f}")
print("the deficit shrinks like (9/8) delta: boundary slivers vanish slowly\n")

print("total crossing intensity, sparse regime (t^2 delta^4 = 4.14):")
print(f"{'t':>6} {'delta':>7} {'mean/limit':>11}   (800 replications each)")
for t in (200.0, 1000.0, 8000.0):
    cfg = ExperimentConfig(
        regime=RegimeSpec.sparse(4.14, 3),
        t_values=(t,),
        replications=800,
        seed=int(t),
        record_stress=False,
    )
    records = run_replications(cfg)
    mean = np.mean([r.total_crossings for r in records])
    limit = limit_intensity(cfg.window, cfg.plane, 4.14, FullPlane())
    delta = cfg.regime.delta_for(t)
    print(f"{t:>6.0f} {delta:>7.4f} {mean / limit:>11.4f}")
print("""
The ratios climb toward 1 roughly like 1 - 1.8*delta, which is the content
of the intensity convergence, but a several-percent gap survives even at
t=8000.  Statistical comparisons against the limit formulas need tolerance
budgets at least as large as these measured gaps, or they will (correctly)
fail.""")
