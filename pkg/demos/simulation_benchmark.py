"""A small replicated benchmark against the cross-validated Lasso support.

Uses 20 replicates per signal level so it finishes in about a minute; the
CLI ``fncreg bench`` runs the full tables.
"""

from fncreg import FncRegConfig, ScenarioConfig
from fncreg.bench import Bench

base = ScenarioConfig(n=150, p=200, s=10, theta=0.02, sigma=1.0, epsilon=0.1, replicates=20, master_seed=11)
bench = Bench(FncRegConfig(), epsilons=(0.1, 0.2, 0.3))

print("beta1  method    FNP    FDP    F")
for row in bench.table1(base, betas=(0.3, 0.5)):
    print(f"{row['beta1']:.1f}    {row['method']:9s} {row['fnp_mean']:.3f}  {row['fdp_mean']:.3f}  {row['f_mean']:.3f}")

print("\nbeta1  eps   freq(FNP<=eps)  FDP")
for row in bench.table2(base, betas=(0.5,)):
    print(f"{row['beta1']:.1f}    {row['epsilon']:.1f}   {row['freq_fnp_le_eps']:.2f}            {row['fdp_mean']:.3f}")
