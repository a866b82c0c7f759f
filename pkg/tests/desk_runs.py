"""Shared desk-scale simulation runs.

Scenario: n=150 (and n=100 for the s_hat comparison), p=200, s=10,
theta=0.02, sigma=1.  The replicate count defaults to 100 and can be lowered
through the FNCREG_REPLICATES environment variable for quick local runs.
"""

import functools
import os

from fncreg.bench import Bench
from fncreg.fnp import FncRegConfig
from fncreg.simulate import ScenarioConfig

REPLICATES = int(os.environ.get("FNCREG_REPLICATES", "100"))
WORKERS = int(os.environ.get("FNCREG_WORKERS", str(min(4, os.cpu_count() or 1))))
BASE = ScenarioConfig(n=150, p=200, s=10, theta=0.02, sigma=1.0, epsilon=0.1, replicates=REPLICATES, master_seed=2024)


@functools.lru_cache(maxsize=None)
def bench() -> Bench:
    return Bench(FncRegConfig(), epsilons=(0.1, 0.2, 0.3), workers=WORKERS, progress=True)
