"""
The scalar safety filter and the disturbance observer
=====================================================

Both building blocks are closed form and can be used on their own.
"""

import numpy as np

from rrcbf.config import ObserverConfig, ScenarioConfig
from rrcbf.plants import DisturbanceSignal, LinearBenchmark
from rrcbf.safety_filter import HalfspaceConstraint, filter_scalar
from rrcbf.sim_engine import run_scenario

# a u + b >= 0 with a box on u; the result carries a status tag
for u0, a, b, box in ((0.0, -1.0, 2.0, (-10, 10)), (2.0, -1.0, 1.0, (-10, 10)),
                      (-5.0, -1.0, 1.0, (-2, 10)), (0.0, 1.0, -5.0, (-1, 1))):
    res = filter_scalar(u0, HalfspaceConstraint(np.array([a]), b), *box)
    print(f"u0={u0:5.1f}  {a:+.0f} u {b:+.0f} >= 0  box={box}  ->  u={res.u_applied[0]:5.1f}  {res.status.value}")

# The observer estimate relaxes onto a constant disturbance at rate L.
cfg = ScenarioConfig("observer", LinearBenchmark(), None, DisturbanceSignal.constant(1.0), (0.0, 0.0),
                     horizon=1.0, observer=ObserverConfig(enabled=True, gain=10.0))
tr = run_scenario(cfg)
print()
for t in (0.0, 0.1, 0.2, 0.5, 1.0):
    k = int(round(t / cfg.dt))
    print(f"t={t:3.1f}  w_hat={tr.d_hat[k]:.6f}  1 - exp(-10 t)={1 - np.exp(-10 * t):.6f}")
