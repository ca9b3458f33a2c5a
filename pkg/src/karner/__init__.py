"""Resolvent formula for operators ``D x I + sum_j P_j x H_j`` and its Floquet realization."""

from .errors import (
    BadPartition,
    KarnerError,
    KreinPole,
    NearPole,
    NonPositive,
    RadiusViolation,
    RealAxis,
    SeriesDivergence,
    SingularFactor,
    SingularShift,
    SpectrumHit,
    Unattainable,
)
from .floquet_fermi import (
    DriveProfile,
    FloquetTruncation,
    FourierBasisSpec,
    assemble_commutator,
    assemble_floquet_K,
    assemble_floquet_Lambda,
    check_bounds,
    fourier_coefficients,
    minimal_s0,
    neumann_series_Lambda,
    verify_floquet_karner,
)
from .krein_boundary import (
    NeumannBasis,
    SpectralParameter,
    alpha_bound,
    green0,
    krein_diff_kernel,
    rank_one_norm,
    spatial_resolvent_matrix,
    tau_R0_tau,
)
from .tensor_core import (
    KarnerModel,
    ProjectorFamily,
    VerificationReport,
    assemble_D,
    assemble_K,
    assemble_K0,
    assemble_Lambda,
    direct_resolvent,
    karner_resolvent,
    random_model,
    verify_intermediate,
    verify_karner,
)

__version__ = "0.1.0"
