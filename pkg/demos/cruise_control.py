"""
Adaptive cruise control under a lumped disturbance
==================================================

An ego vehicle tracks 20 m/s behind a leader at 15 m/s and must keep the
gap ``D >= 80``. The disturbance ``w = sin t - 0.5 sin 2t`` acts on the
ego acceleration and a disturbance observer (gain 10) estimates it.

This runs five 50 s simulations and takes roughly 20 s.
"""

import numpy as np

from rrcbf.cli import suite_configs
from rrcbf.sim_engine import compute_metrics, max_estimation_error, run_scenario

print(f"{'variant':<10} {'min b(D)':>10} {'final gap':>10} {'first active':>13} {'max |w_hat - w|':>16}")
for cfg in suite_configs("fig5"):
    tr = run_scenario(cfg)
    m = compute_metrics(tr)
    first = tr.t[tr.status.index("active")]
    gap = np.mean(tr.x[-len(tr) // 10:, 2])
    print(f"{cfg.variant.variant.value:<10} {m.min_h:>10.4f} {gap:>10.3f} {first:>12.2f}s "
          f"{max_estimation_error(tr):>16.4f}")

# The plain and observer-based CBFs dip below b = 0. The robust CBF stays
# safe at the price of a larger gap; both reciprocal-resistance variants
# stay safe with a gap only slightly above 80 m.
