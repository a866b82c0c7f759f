"""Debiased Lasso: nodewise precision estimate, bias split and z statistics."""

import math

import numpy as np

from fncreg import (
    ScenarioConfig,
    debias,
    debiased_fit,
    decompose,
    fit_lasso,
    nodewise_regression,
    select_lambda_cv,
    simulate_replicate,
)

rep = simulate_replicate(ScenarioConfig(n=150, p=200, s=10, theta=0.02, beta1=0.5), 0)
data, truth = rep.data, rep.truth

# the theory-level lambda is very conservative at this size; use CV instead
fit = fit_lasso(data, select_lambda_cv(data, seed=0))
nw = nodewise_regression(data)
print("nodewise tau^2 range", np.round([nw.tau_sq.min(), nw.tau_sq.max()], 3))

# sqrt(n)(b - beta) splits into a Gaussian part w and a bias part delta
b = debias(fit, nw, data)
dc = decompose(fit, nw, data, truth.beta, rep.noise, 1.0)
gap = np.abs(math.sqrt(data.n) * (b - truth.beta) - (dc.w - dc.delta)).max()
print(f"decomposition gap {gap:.1e}, max |delta| / max |w| = {np.abs(dc.delta).max() / np.abs(dc.w).max():.3f}")

db = debiased_fit(data, fit, nw, 1.0)
print("z on the support ", np.round(db.z[: truth.s], 2))
print("|z| > 1.96 off the support:", int(np.sum(np.abs(db.z[truth.s:]) > 1.96)), "of", data.p - truth.s)
