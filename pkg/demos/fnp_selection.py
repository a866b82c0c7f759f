"""Selection at a target false negative proportion, and how it moves with epsilon."""

import numpy as np

from fncreg import FncRegConfig, ScenarioConfig, evaluate, run_fnc_reg, simulate_replicate

rep = simulate_replicate(ScenarioConfig(n=150, p=200, s=10, theta=0.02, beta1=0.5), 3)
fit = run_fnc_reg(rep.data, FncRegConfig(sigma=1.0, seed=3))
print(f"c_tilde={fit.calibration.c_tilde:.3f} s_hat={fit.s_hat} (true s={rep.truth.s})")

# one fit, many control levels: only the threshold changes
for eps in (0.05, 0.1, 0.2, 0.3, 0.5):
    sel = fit.select(eps)
    m = evaluate(sel.selected, rep.truth)
    print(f"eps={eps:.2f} t*={sel.t_star:6.3f} selected={len(sel.selected):3d} "
          f"FNP={m.fnp:.2f} FDP={m.fdp:.2f}")

# estimated FNP at the top order statistics
c = fit.curve
print("thresholds", np.round(c.thresholds[:12], 2))
print("FNP hat   ", np.round(c.fnp_hat[:12], 2))
