"""
Floquet operator of a driven boundary
=====================================

Truncate the Floquet operator of a periodically driven Robin coupling in a
Fourier times Neumann basis and check the resolvent formula on the
central Fourier modes.
"""

from karner import floquet_fermi as ff

drive = ff.DriveProfile.harmonic(cos=[0.2])
z = 4j

for k_max, n_max in ((4, 20), (8, 40)):
    trunc = ff.FloquetTruncation.build(k_max, n_max)
    rep = ff.verify_floquet_karner(drive, trunc, z)
    print(f"({k_max},{n_max}) dim {trunc.dim}: central residual {rep.rel_residual:.2e}, "
          f"whole-matrix residual {rep.info['full_rel_residual']:.2e}")

###############################################################################
# For a constant coupling there is no time dependence and the identity is
# exact on the whole matrix.
const = ff.verify_floquet_karner(ff.DriveProfile.constant(0.2), ff.FloquetTruncation.build(8, 40), z)
print("constant drive residual:", const.rel_residual)
