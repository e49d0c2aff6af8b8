"""
Scalar reciprocal-resistance dynamics
=====================================

The one-dimensional system ``z' = -alpha z + beta / z + w`` never reaches
zero from a positive start, whatever the bounded disturbance does.
"""

import math

from rrcbf.scalar_rrbf import ScalarRrParams, analytic_solution, simulate, worst_case_roots

# Without disturbance every positive start relaxes to sqrt(beta / alpha).
params = ScalarRrParams(alpha=1.0, beta=4.0)
for z0 in (0.1, 1.0, 5.0):
    ts, zs = simulate(params, z0, 10.0)
    exact = analytic_solution(params, z0, ts[-1])
    print(f"z0={z0:4.1f}  z(10)={zs[-1]:.10f}  closed form={exact:.10f}")

# With |w| <= w_bar the state is trapped between the two worst-case roots.
params = ScalarRrParams(alpha=1.0, beta=2.0, w_bar=1.0)
roots = worst_case_roots(params)
print(f"\nworst-case band [{roots.z1:.6g}, {roots.z2:.6g}], undisturbed level {roots.z_eq:.6g}")

for z0 in (0.05, 3.0, 8.0):
    _, zs = simulate(params, z0, 20.0, disturbance=lambda t: math.copysign(1.0, math.sin(5 * t)))
    tail = zs[len(zs) // 2:]
    print(f"z0={z0:4.2f}  min z={zs.min():.4f}  late range=[{tail.min():.4f}, {tail.max():.4f}]")
