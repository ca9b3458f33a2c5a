"""Neumann Laplacian on [0, 1] with a rank-one boundary coupling at x = 0.

``H_0 = -d^2/dx^2`` with Neumann conditions at both ends; ``H_g`` replaces
the condition at the origin by ``f'(0) = g f(0)``.  Eigenpairs of ``H_0``:
``mu_n = (n pi)^2`` with ``phi_0 = 1`` and ``phi_n = sqrt(2) cos(n pi x)``.

Every kernel below is even in ``sqrt(z)``; the principal branch is used
throughout and the evaluation is arranged so that only exponentials of
modulus at most one appear, which keeps it finite far from the real axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import KreinPole, NearPole, NonPositive, RealAxis

POLE_GUARD = 1e-10
KREIN_GUARD = 1e-12
REAL_AXIS_GUARD = 1e-13


@dataclass(frozen=True)
class SpectralParameter:
    """A complex ``z`` together with a square root of it.

    ``sqrt_z`` defaults to the principal branch (``Re >= 0``).  Passing the
    other root is allowed; results do not depend on the choice.
    """

    z: complex
    sqrt_z: complex | None = None

    def __post_init__(self):
        z = complex(self.z)
        w = np.sqrt(z) if self.sqrt_z is None else complex(self.sqrt_z)
        if abs(w * w - z) > 1e-14 * max(abs(z), 1e-300) and z != 0:
            raise ValueError(f"sqrt_z={w!r} is not a square root of z={z!r}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "sqrt_z", complex(w))


@dataclass(frozen=True)
class NeumannBasis:
    n_max: int

    @cached_property
    def eigenvalues(self):
        n = np.arange(self.n_max + 1)
        return (n * np.pi) ** 2

    @cached_property
    def boundary_values(self):
        tau = np.full(self.n_max + 1, np.sqrt(2.0))
        tau[0] = 1.0
        return tau

    @property
    def size(self):
        return self.n_max + 1


@dataclass(frozen=True)
class BoundaryCoupling:
    g: float

    def __post_init__(self):
        if not np.isfinite(self.g):
            raise ValueError("coupling must be finite")


def _as_param(z):
    return z if isinstance(z, SpectralParameter) else SpectralParameter(z)


def _check_pole(z, k=None):
    re = max(z.real, 0.0)
    root = np.sqrt(re) / np.pi
    for n in {int(np.floor(root)), int(np.ceil(root))}:
        if abs(z - (n * np.pi) ** 2) < POLE_GUARD:
            raise NearPole(z, n, k)


def _upper_root(p):
    # the kernels are even in sqrt(z): pick the root with Im >= 0
    w = p.sqrt_z
    return -w if w.imag < 0 or (w.imag == 0 and w.real < 0) else w


def _cot(w):
    q = np.exp(2j * w)
    return 1j * (q + 1) / (q - 1)


def green0(x, y, z):
    """Integral kernel of ``(H_0 - z)^-1`` at ``(x, y)``.

    Closed form ``-cos(w min(x,y)) cos(w (max(x,y) - 1)) / (w sin w)`` with
    ``w = sqrt(z)``; the kernel is continuous on the diagonal so the
    min/max form settles the step-function convention at ``x = y``.
    """
    p = _as_param(z)
    _check_pole(p.z)
    w = _upper_root(p)
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    ratio = (
        np.exp(1j * w * (b - a))
        * (1 + np.exp(2j * w * a))
        * (1 + np.exp(2j * w * (1 - b)))
        * 1j
        / (2 * (np.exp(2j * w) - 1))
    )
    return -ratio / w


def tau_R0_tau(z):
    """Boundary value ``tau R_0(z) tau* = -cot(sqrt z) / sqrt z``."""
    p = _as_param(z)
    _check_pole(p.z)
    w = _upper_root(p)
    return complex(-_cot(w) / w)


def tau_R0_tau_derivative(z):
    """``d/dz tau R_0(z) tau* = tau R_0(z)^2 tau*``."""
    p = _as_param(z)
    _check_pole(p.z)
    w = _upper_root(p)
    cot = _cot(w)
    csc2 = 1 + cot * cot
    return complex((csc2 / w + cot / w**2) / (2 * w))


def krein_denominator(g, z):
    return 1.0 + g * tau_R0_tau(z)


def krein_diff_kernel(g, z, x, y):
    """Kernel of ``R_g(z) - R_0(z)``: ``-g / (1 + g tau R_0 tau*) G_0(x, 0) G_0(0, y)``."""
    if g == 0:
        return np.zeros(np.broadcast(x, y).shape, dtype=complex)[()]
    den = krein_denominator(g, z)
    if abs(den) <= KREIN_GUARD:
        raise KreinPole(g, complex(_as_param(z).z))
    return (-g / den) * green0(x, 0.0, z) * green0(0.0, y, z)


def rank_one_norm(z):
    """Operator norm of ``R_0(z) tau* tau R_0(z)``, equal to ``|Im tau R_0 tau*| / |Im z|``."""
    p = _as_param(z)
    if abs(p.z.imag) < REAL_AXIS_GUARD:
        raise RealAxis(f"Im z = {p.z.imag!r} is too close to the real axis")
    return abs(tau_R0_tau(p).imag) / abs(p.z.imag)


def alpha_bound(s0):
    """``(2 / s0) sqrt(1 + s0 / 4)``: bounds ``|tau R_0(z) tau*|`` whenever ``|Im z| >= s0``."""
    if not s0 > 0:
        raise NonPositive(f"s0 must be positive, got {s0!r}")
    return 2.0 / s0 * np.sqrt(1.0 + s0 / 4.0)


def resolvent_trace_vector(z, n_max):
    """Neumann-basis coefficients of ``R_0(z) tau*``: ``tau_n / (mu_n - z)``."""
    p = _as_param(z)
    _check_pole(p.z)
    basis = NeumannBasis(n_max)
    return basis.boundary_values / (basis.eigenvalues - p.z)


def truncated_trace(z, n_max):
    """``sum_{n <= n_max} tau_n^2 / (mu_n - z)``, the Galerkin version of ``tau R_0 tau*``."""
    p = _as_param(z)
    _check_pole(p.z)
    basis = NeumannBasis(n_max)
    return complex(np.sum(basis.boundary_values**2 / (basis.eigenvalues - p.z)))


def boundary_trace(z, n_max, trace="exact"):
    if trace == "exact":
        return tau_R0_tau(z)
    if trace == "galerkin":
        return truncated_trace(z, n_max)
    raise ValueError(f"unknown trace mode {trace!r}")


def krein_correction(g, z, n_max, trace="exact"):
    """Rank-one part of the truncated ``R_g(z)``: ``(-g / (1 + g s)) v v^T``.

    ``s`` is the closed-form ``tau R_0 tau*`` (``trace="exact"``, giving the
    exact matrix elements of ``R_g``) or the sum over retained modes
    (``trace="galerkin"``, giving the exact inverse of the truncated
    ``H_0 + g tau tau^T``).
    """
    v = resolvent_trace_vector(z, n_max)
    if g == 0:
        return np.zeros((v.size, v.size), dtype=complex)
    den = 1.0 + g * boundary_trace(z, n_max, trace)
    if abs(den) <= KREIN_GUARD:
        raise KreinPole(g, complex(_as_param(z).z))
    return (-g / den) * np.outer(v, v)


def spatial_resolvent_matrix(g, z, n_max, trace="exact"):
    """Matrix of ``R_g(z)`` in the first ``n_max + 1`` Neumann modes."""
    p = _as_param(z)
    basis = NeumannBasis(n_max)
    _check_pole(p.z)
    return np.diag(1.0 / (basis.eigenvalues - p.z)) + krein_correction(g, p, n_max, trace)
