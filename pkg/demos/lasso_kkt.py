"""Lasso by coordinate descent, checked through its optimality conditions."""

import numpy as np

from fncreg import Dataset, fit_lasso, lambda_max, select_lambda_cv
from fncreg.model import kkt_residual

rng = np.random.default_rng(0)
n, p = 100, 300
x = rng.standard_normal((n, p))
beta = np.zeros(p)
beta[:5] = [2.0, -1.5, 1.0, 1.0, -0.5]
y = x @ beta + 0.5 * rng.standard_normal(n)
data = Dataset(x, y)

# above lambda_max the zero vector is optimal
top = lambda_max(data)
print("lambda_max", round(top, 4), "nonzeros", np.count_nonzero(fit_lasso(data, 1.01 * top).beta_hat))

# a path of fits, each tested against the subgradient conditions
for frac in (0.5, 0.2, 0.05):
    fit = fit_lasso(data, frac * top)
    print(f"lam={fit.lam:.4f} sweeps={fit.iterations:4d} support={len(fit.support):3d} "
          f"kkt={kkt_residual(x, y, fit.beta_hat, fit.lam):.1e}")

# the objective never rises between sweeps
fit = fit_lasso(data, 0.1 * top, track_objective=True)
print("monotone objective:", bool(np.all(np.diff(fit.history) <= 1e-12)))

lam = select_lambda_cv(data, folds=10, seed=1)
fit = fit_lasso(data, lam)
print("cv lambda", round(lam, 4), "first coefficients", np.round(fit.beta_hat[:6], 3))
