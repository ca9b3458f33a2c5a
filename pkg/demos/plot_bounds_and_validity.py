"""
Norm bounds and the smallest admissible imaginary part
======================================================

Compare power-iteration norms of the truncated Lambda and its commutator
with the closed-form bounds, then find the smallest |Im z| where the
perturbative conditions hold.
"""

from karner import floquet_fermi as ff

drive = ff.DriveProfile.harmonic(cos=[0.2])
for k_max, n_max in ((4, 20), (8, 40)):
    rep = ff.check_bounds(drive, ff.FloquetTruncation.build(k_max, n_max), 4j)
    print(f"({k_max},{n_max}) |Lambda| {rep.lambda_norm:.4f} <= {rep.lambda_bound:.4f}, "
          f"|[D,Lambda]| {rep.commutator_norm:.4f} <= {rep.commutator_bound:.4f}")

###############################################################################
# The admissible set in s0 is a half-line, found by bisection.
v = ff.minimal_s0(drive)
print("minimal s0:", v)
for s in (0.99 * v, 1.01 * v):
    print(f"  s0 = {s:.5f}: conditions hold = {ff.validity_conditions(drive.sup_g, drive.sup_g_prime, s)[1]}")
