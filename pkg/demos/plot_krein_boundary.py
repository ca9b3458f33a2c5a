"""
Robin boundary through a rank-one correction
============================================

The Neumann Laplacian on [0, 1] has an explicit Green function. A Robin
condition at x = 0 with coupling g changes its resolvent by a rank-one term.
"""

import numpy as np

from karner import krein_boundary as kb

z = 2j
# boundary value of the free resolvent, two ways
print("closed form :", kb.tau_R0_tau(z))
print("kernel G(0,0):", kb.green0(0.0, 0.0, z))
print("at z = -1    :", kb.green0(0.0, 0.0, -1.0), "vs coth(1) =", 1 / np.tanh(1.0))

###############################################################################
# The kernel of the resolvent difference is symmetric in (x, y).
g = 0.5
print("diff kernel:", kb.krein_diff_kernel(g, z, 0.25, 0.75), kb.krein_diff_kernel(g, z, 0.75, 0.25))

###############################################################################
# The rank-one operator R0 tau* tau R0 has an explicit norm, bounded by
# alpha(s0) / s0 on the line |Im z| = s0.
for s0 in (0.5, 1.0, 4.0):
    worst = max(kb.rank_one_norm(complex(re, s0)) for re in np.arange(-20, 80.5, 0.5))
    print(f"s0 = {s0}: max norm {worst:.4f} <= {kb.alpha_bound(s0) / s0:.4f}")
