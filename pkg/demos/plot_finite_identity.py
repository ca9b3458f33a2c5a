"""
Resolvent formula for a finite tensor model
===========================================

Build a random two-factor model, assemble both sides of the resolvent
formula and compare them with a direct inverse.
"""

import numpy as np

from karner import tensor_core as tc

# non-Hermitian projector families, 6-dimensional T factor, 4-dimensional H factor
model = tc.random_model(dim_T=6, dim_H=4, M=3, N=2, seed=7)
print("total dimension:", model.dim)

# the formula and the direct inverse agree to rounding
for z in (2j, -1 + 3j, 4 - 1.5j):
    rep = tc.verify_karner(model, z)
    print(f"z = {z}: relative residual {rep.rel_residual:.2e}, "
          f"factor condition {rep.commutator_factor_condition:.2e}")

###############################################################################
# When the P family is trivial, Lambda commutes with D and the correction
# factor is the identity.
trivial = tc.random_model(dim_T=6, dim_H=4, M=3, N=1, seed=7)
lam = tc.assemble_Lambda(trivial, 2j)
print("commutator norm:", np.linalg.norm(tc.commutator_with_D(trivial, lam), 2))
