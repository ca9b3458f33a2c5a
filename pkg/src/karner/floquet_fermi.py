"""Fourier-Galerkin realization of the simplified Fermi accelerator.

The Floquet Hamiltonian ``K = -i d/dt + H_{g(t)}`` acts on T-periodic
functions with values in ``L^2([0, 1])``.  It is truncated to Fourier modes
``chi_k``, ``|k| <= k_max``, tensored with Neumann modes ``phi_n``,
``n <= n_max``; index ``(k + k_max) * (n_max + 1) + n``.

Multiplication by a function of ``t`` is compressed to the Fourier window
with a uniform trapezoid rule on ``n_t >= 4 k_max + 1`` points, exact for
band-limited data and spectrally accurate for smooth periodic data.

The spatial part of ``Lambda(z)`` uses the Galerkin boundary trace (sum over
retained Neumann modes) so that each fibre ``H_{g(t)}`` is inverted exactly
inside the truncated space; only the time compression is approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg as sla

from ._linalg import RCOND_THRESHOLD, guarded_inverse, lu_with_rcond, power_norm, solve_right
from .errors import (
    KreinPole,
    RadiusViolation,
    RealAxis,
    SeriesDivergence,
    SingularFactor,
    SpectrumHit,
    Unattainable,
)
from .krein_boundary import (
    KREIN_GUARD,
    REAL_AXIS_GUARD,
    NeumannBasis,
    _check_pole,
    alpha_bound,
    boundary_trace,
    resolvent_trace_vector,
)
from .tensor_core import SINGULAR_FACTOR, Z_IN_SPECTRUM, VerificationReport


@dataclass(frozen=True)
class DriveProfile:
    """A real T-periodic coupling ``g(t)`` and its derivative.

    ``func`` (and ``deriv`` if given) must accept numpy arrays.  Without
    ``deriv`` the derivative is obtained by spectral differentiation of the
    ``n_t`` grid samples.  ``sup_g`` and ``sup_g_prime`` are grid maxima,
    i.e. lower bounds of the true sup norms.
    """

    period: float
    func: Callable
    deriv: Callable | None = None
    n_t: int = 1024
    label: str = "custom"

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        g0, g_end = self.func(np.array([0.0, self.period]))
        if abs(g0 - g_end) > 1e-12 * max(1.0, abs(g0)):
            raise ValueError(f"g is not {self.period}-periodic: g(0)={g0!r}, g(T)={g_end!r}")

    @classmethod
    def harmonic(cls, period=2 * np.pi, cos=(), sin=(), const=0.0, n_t=1024):
        """``g(t) = const + sum_m cos[m-1] cos(m w t) + sin[m-1] sin(m w t)``."""
        omega = 2 * np.pi / period
        a = np.asarray(cos, dtype=float)
        b = np.asarray(sin, dtype=float)

        def func(t):
            t = np.asarray(t, dtype=float)
            out = np.full(t.shape, float(const))
            for m, c in enumerate(a, start=1):
                out = out + c * np.cos(m * omega * t)
            for m, c in enumerate(b, start=1):
                out = out + c * np.sin(m * omega * t)
            return out

        def deriv(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros(t.shape)
            for m, c in enumerate(a, start=1):
                out = out - c * m * omega * np.sin(m * omega * t)
            for m, c in enumerate(b, start=1):
                out = out + c * m * omega * np.cos(m * omega * t)
            return out

        label = f"harmonic(const={const}, cos={list(a)}, sin={list(b)}, T={period})"
        return cls(period, func, deriv, n_t, label)

    @classmethod
    def constant(cls, c, period=2 * np.pi, n_t=64):
        return cls.harmonic(period, const=c, n_t=n_t)

    @property
    def omega(self):
        return 2 * np.pi / self.period

    @cached_property
    def times(self):
        return np.arange(self.n_t) * (self.period / self.n_t)

    @cached_property
    def g_values(self):
        return np.asarray(self.func(self.times), dtype=float)

    @cached_property
    def g_prime_values(self):
        return self.evaluate_prime(self.times)

    @property
    def sup_g(self):
        return float(np.max(np.abs(self.g_values)))

    @property
    def sup_g_prime(self):
        return float(np.max(np.abs(self.g_prime_values)))

    def evaluate(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def evaluate_prime(self, t):
        t = np.asarray(t, dtype=float)
        if self.deriv is not None:
            return np.asarray(self.deriv(t), dtype=float)
        coeffs = np.fft.fft(self.g_values) / self.n_t
        m = np.fft.fftfreq(self.n_t, d=1.0 / self.n_t)
        if self.n_t % 2 == 0:
            coeffs[self.n_t // 2] = 0.0  # Nyquist mode has no consistent derivative
        phase = np.exp(1j * self.omega * np.multiply.outer(t, m))
        return np.real(phase @ (1j * m * self.omega * coeffs))


@dataclass(frozen=True)
class FourierBasisSpec:
    """Modes ``chi_k(t) = T^{-1/2} exp(i k w t)`` for ``|k| <= k_max``; ``D chi_k = k w chi_k``."""

    k_max: int
    period: float = 2 * np.pi

    @property
    def omega(self):
        return 2 * np.pi / self.period

    @cached_property
    def modes(self):
        return np.arange(-self.k_max, self.k_max + 1)

    @property
    def size(self):
        return 2 * self.k_max + 1

    @property
    def eigenvalues(self):
        return self.modes * self.omega

    def chi(self, t):
        """Sampled modes, shape ``(size, len(t))``."""
        t = np.asarray(t, dtype=float)
        return np.exp(1j * self.omega * np.multiply.outer(self.modes, t)) / np.sqrt(self.period)


@dataclass(frozen=True)
class FloquetTruncation:
    basis: FourierBasisSpec
    space: NeumannBasis
    n_t: int

    def __post_init__(self):
        if self.n_t < 4 * self.basis.k_max + 1:
            raise ValueError(f"n_t={self.n_t} must be at least 4*k_max+1={4 * self.basis.k_max + 1}")

    @classmethod
    def build(cls, k_max, n_max, period=2 * np.pi, n_t=None):
        if n_t is None:
            n_t = max(64, 4 * k_max + 1)
        return cls(FourierBasisSpec(k_max, period), NeumannBasis(n_max), n_t)

    @property
    def k_max(self):
        return self.basis.k_max

    @property
    def n_max(self):
        return self.space.n_max

    @property
    def dim(self):
        return self.basis.size * self.space.size

    @cached_property
    def times(self):
        return np.arange(self.n_t) * (self.basis.period / self.n_t)

    def index(self, k, n):
        return (k + self.k_max) * self.space.size + n

    def mode_window(self, edge):
        """Flat indices of all Neumann modes attached to ``|k| <= k_max - edge``."""
        keep = self.space.size * np.arange(edge, self.basis.size - edge)
        return (keep[:, None] + np.arange(self.space.size)[None, :]).ravel()


@dataclass
class FloquetOperators:
    z: complex | None
    K0_mat: np.ndarray
    K_mat: np.ndarray
    Lambda_mat: np.ndarray | None = None
    commutator_mat: np.ndarray | None = None


@dataclass
class BoundsReport:
    z: complex
    s0: float
    alpha: float
    sup_g: float
    sup_g_prime: float
    lambda_norm: float
    commutator_norm: float
    lambda_bound: float
    commutator_bound: float
    radius_ok: bool
    commutator_condition_ok: bool
    lambda_ok: bool = field(init=False)
    commutator_ok: bool = field(init=False)

    def __post_init__(self):
        self.lambda_ok = self.lambda_norm <= self.lambda_bound
        self.commutator_ok = self.commutator_norm <= self.commutator_bound

    @property
    def passed(self):
        return self.radius_ok and self.commutator_condition_ok and self.lambda_ok and self.commutator_ok


def _check_period(drive, trunc):
    if not np.isclose(drive.period, trunc.basis.period, rtol=1e-14, atol=0.0):
        raise ValueError(f"drive period {drive.period} differs from basis period {trunc.basis.period}")


def _quadrature_coefficients(values, times, omega, ms):
    """Trapezoid Fourier coefficients ``(1/n_t) sum_i f(t_i) exp(-i m w t_i)``.

    ``values`` has time along its last axis; the result replaces it by ``ms``.
    """
    kernel = np.exp(-1j * omega * np.multiply.outer(times, ms)) / len(times)
    return values @ kernel


def fourier_coefficients(drive, k_max, n_t=None):
    """Coefficients ``g_m``, ``|m| <= 2 k_max``, of the drive (on its own grid unless ``n_t``)."""
    if n_t is None:
        times, values = drive.times, drive.g_values
    else:
        times = np.arange(n_t) * (drive.period / n_t)
        values = drive.evaluate(times)
    ms = np.arange(-2 * k_max, 2 * k_max + 1)
    return ms, _quadrature_coefficients(values.astype(complex), times, drive.omega, ms)


def _toeplitz_from_coefficients(coeffs, k_max):
    # coeffs indexed by m = -2k_max..2k_max; entry (k', k) = coeffs[k' - k]
    col = coeffs[2 * k_max:]          # m = 0..2k_max  -> first column (k' - k >= 0)
    row = coeffs[2 * k_max::-1]       # m = 0..-2k_max -> first row
    return sla.toeplitz(col, row)


def assemble_floquet_K(drive, trunc):
    """Truncated ``K_0`` (diagonal ``k w + (n pi)^2``) and ``K = K_0 + [g_{k'-k}] x [tau_n tau_n']``."""
    _check_period(drive, trunc)
    basis, space = trunc.basis, trunc.space
    diag = np.add.outer(basis.eigenvalues, space.eigenvalues).ravel()
    k0 = np.diag(diag).astype(complex)
    _, coeffs = fourier_coefficients(drive, trunc.k_max, trunc.n_t)
    toeplitz = _toeplitz_from_coefficients(coeffs, trunc.k_max)
    tau = space.boundary_values
    k_mat = k0 + np.kron(toeplitz, np.outer(tau, tau))
    return FloquetOperators(None, k0, k_mat)


def _fibre_data(drive, trunc, z, trace):
    """Per Fourier shift ``k``: vectors ``R_0(z - k w) tau*`` and traces ``s_k``."""
    z = complex(z)
    if abs(z.imag) < REAL_AXIS_GUARD:
        raise RealAxis(f"Im z = {z.imag!r} is too close to the real axis")
    vecs, traces = [], []
    for k in trunc.basis.modes:
        zeta = z - k * trunc.basis.omega
        _check_pole(zeta, int(k))
        vecs.append(resolvent_trace_vector(zeta, trunc.n_max))
        traces.append(boundary_trace(zeta, trunc.n_max, trace))
    return np.array(vecs), np.array(traces)


def _assemble_from_scalar(trunc, vecs, scalar_fn):
    """Block matrix with block ``(k', k) = c_k[k' - k] v_k v_k^T``.

    ``scalar_fn`` has shape ``(n_modes, n_t)``: the time profile multiplying
    the rank-one fibre operator at each shift ``k``.
    """
    basis = trunc.basis
    ms = np.arange(-2 * trunc.k_max, 2 * trunc.k_max + 1)
    coeffs = _quadrature_coefficients(scalar_fn, trunc.times, basis.omega, ms)
    # c[k', k] = coeffs[k, (k' - k) + 2 k_max]
    kk = np.arange(basis.size)
    offsets = kk[:, None] - kk[None, :] + 2 * trunc.k_max
    c = coeffs[kk[None, :], offsets]
    ns = trunc.space.size
    out = np.empty((basis.size, ns, basis.size, ns), dtype=complex)
    for col in range(basis.size):
        outer = np.outer(vecs[col], vecs[col])
        out[:, :, col, :] = c[:, col, None, None] * outer[None, :, :]
    return out.reshape(trunc.dim, trunc.dim)


def _krein_profile(drive, trunc, traces):
    g = drive.evaluate(trunc.times)
    den = 1.0 + np.multiply.outer(traces, g)
    bad = np.argwhere(np.abs(den) <= KREIN_GUARD)
    if bad.size:
        i, j = bad[0]
        raise KreinPole(float(g[j]), complex(traces[i]), int(trunc.basis.modes[i]))
    return -g[None, :] / den


def assemble_floquet_Lambda(drive, trunc, z, trace="galerkin"):
    """Truncated ``Lambda(z)``: Fourier compression of ``t -> R_{g(t)}(z - k w) - R_0(z - k w)``.

    Column block ``k`` carries the rank-one Krein correction at the shifted
    parameter ``z - k w``; its time profile ``-g(t) / (1 + g(t) s_k)`` is
    projected onto ``chi_{k'} conj(chi_k)`` by the trapezoid rule.
    """
    _check_period(drive, trunc)
    vecs, traces = _fibre_data(drive, trunc, z, trace)
    return _assemble_from_scalar(trunc, vecs, _krein_profile(drive, trunc, traces))


def _series_radius_ok(drive, z):
    s0 = abs(complex(z).imag)
    return s0 > 0 and drive.sup_g * alpha_bound(s0) < 1.0


def neumann_series_terms(drive, trunc, z, n_terms, trace="galerkin"):
    """Yield the successive terms ``n = 0 .. n_terms-1`` of the Born series for ``Lambda(z)``.

    Term ``n`` is the projection of ``(-1)^{n+1} g(t)^{n+1} s_k^n R_0 tau* tau R_0``.
    """
    if not _series_radius_ok(drive, z):
        raise RadiusViolation(
            f"sup|g| * alpha(|Im z|) >= 1 for sup|g|={drive.sup_g:.6g}, z={complex(z)!r}"
        )
    _check_period(drive, trunc)
    vecs, traces = _fibre_data(drive, trunc, z, trace)
    g = drive.evaluate(trunc.times)
    for n in range(n_terms):
        profile = (-1.0) ** (n + 1) * np.multiply.outer(traces**n, g ** (n + 1))
        yield _assemble_from_scalar(trunc, vecs, profile)


def neumann_series_Lambda(drive, trunc, z, n_terms, trace="galerkin"):
    """Partial sum of the Born series for ``Lambda(z)`` with ``n_terms`` terms."""
    total = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    for term in neumann_series_terms(drive, trunc, z, n_terms, trace):
        total += term
    return total


def _shift_diagonal(trunc):
    return np.repeat(trunc.basis.eigenvalues, trunc.space.size)


def commutator_from_Lambda(trunc, lam_mat):
    """``[D x I, Lambda]``: block ``(k', k)`` scaled by ``w (k' - k)``."""
    d = _shift_diagonal(trunc)
    return (d[:, None] - d[None, :]) * lam_mat


def assemble_commutator(drive, trunc, z, lam_mat=None, trace="galerkin"):
    if lam_mat is None:
        lam_mat = assemble_floquet_Lambda(drive, trunc, z, trace)
    return commutator_from_Lambda(trunc, lam_mat)


def commutator_series(drive, trunc, z, n_terms, trace="galerkin"):
    """Commutator from the derivative series ``-i g'(t) sum_n (-1)^{n+1} (n+1) g^n s_k^n``."""
    if not _series_radius_ok(drive, z):
        raise SeriesDivergence(
            f"sup|g| * alpha(|Im z|) >= 1 for sup|g|={drive.sup_g:.6g}, z={complex(z)!r}"
        )
    _check_period(drive, trunc)
    vecs, traces = _fibre_data(drive, trunc, z, trace)
    g = drive.evaluate(trunc.times)
    gp = drive.evaluate_prime(trunc.times)
    x = np.multiply.outer(traces, g)
    total = np.zeros_like(x)
    power = np.ones_like(x)
    for n in range(n_terms):
        total += (-1.0) ** (n + 1) * (n + 1) * power
        power = power * x
    return _assemble_from_scalar(trunc, vecs, -1j * gp[None, :] * total)


def lambda_norm_bound(sup_g, s0):
    """Right-hand side of the bound on ``||Lambda(z)||`` (``inf`` outside the convergence radius)."""
    a = alpha_bound(s0)
    q = sup_g * a
    if q >= 1.0:
        return float("inf")
    return sup_g * a / (s0 * (1.0 - q))


def commutator_norm_bound(sup_g, sup_g_prime, s0):
    """Right-hand side of the bound on ``||[D x I, Lambda(z)]||``."""
    a = alpha_bound(s0)
    q = sup_g * a
    if q >= 1.0:
        return float("inf")
    return sup_g_prime * a / (s0 * (1.0 - q) ** 2)


def validity_conditions(sup_g, sup_g_prime, s0):
    """``(radius_ok, commutator_ok)`` for the perturbative validity region at ``s0``."""
    radius_ok = sup_g * alpha_bound(s0) < 1.0
    return radius_ok, radius_ok and commutator_norm_bound(sup_g, sup_g_prime, s0) < 1.0


def check_bounds(drive, trunc, z, trace="galerkin"):
    """Power-iteration norms of the truncated ``Lambda`` and commutator versus their closed-form bounds."""
    z = complex(z)
    s0 = abs(z.imag)
    if s0 == 0:
        raise RealAxis("check_bounds needs Im z != 0")
    lam_mat = assemble_floquet_Lambda(drive, trunc, z, trace)
    comm = commutator_from_Lambda(trunc, lam_mat)
    radius_ok, comm_ok = validity_conditions(drive.sup_g, drive.sup_g_prime, s0)
    return BoundsReport(
        z=z,
        s0=s0,
        alpha=float(alpha_bound(s0)),
        sup_g=drive.sup_g,
        sup_g_prime=drive.sup_g_prime,
        lambda_norm=power_norm(lam_mat),
        commutator_norm=power_norm(comm),
        lambda_bound=lambda_norm_bound(drive.sup_g, s0),
        commutator_bound=commutator_norm_bound(drive.sup_g, drive.sup_g_prime, s0),
        radius_ok=radius_ok,
        commutator_condition_ok=comm_ok,
    )


def default_edge(trunc):
    """Outer Fourier layers dropped from residuals: the outer half of the window."""
    return (trunc.k_max + 1) // 2


def verify_floquet_karner(drive, trunc, z, tol=1e-6, edge=None, trace="galerkin"):
    """Residual of the resolvent formula for the truncated Floquet operators.

    ``rel_residual`` is the spectral norm of the difference between the
    formula and ``(K - z)^-1`` restricted to the modes ``|k| <= k_max - edge``,
    divided by ``||(K - z)^-1||``.  Fourier compression of ``Lambda`` is
    inexact only near ``|k| = k_max``; the error decays geometrically
    inward.  ``info`` also carries the unrestricted residual and whether
    ``z`` lies in the perturbative validity region.
    """
    z = complex(z)
    if edge is None:
        edge = default_edge(trunc)
    if not 0 <= edge <= trunc.k_max:
        raise ValueError(f"edge={edge} must lie in [0, k_max={trunc.k_max}]")
    s0 = abs(z.imag)
    radius_ok, comm_ok = validity_conditions(drive.sup_g, drive.sup_g_prime, s0) if s0 else (False, False)
    info = {"edge": edge, "validity_region": bool(comm_ok), "radius_ok": bool(radius_ok)}
    nan = float("nan")

    ops = assemble_floquet_K(drive, trunc)
    eye = np.eye(trunc.dim, dtype=complex)
    try:
        direct = guarded_inverse(ops.K_mat - z * eye, SpectrumHit)
    except SpectrumHit:
        return VerificationReport(z, nan, nan, nan, {Z_IN_SPECTRUM}, tol, info)
    del ops

    lam_mat = assemble_floquet_Lambda(drive, trunc, z, trace)
    factor = commutator_from_Lambda(trunc, lam_mat)
    factor += eye
    del eye
    lu, rcond = lu_with_rcond(factor)
    del factor
    cond = float("inf") if rcond == 0.0 else 1.0 / rcond
    if rcond < RCOND_THRESHOLD:
        return VerificationReport(z, nan, nan, cond, {SINGULAR_FACTOR}, tol, info)
    k0_diag = np.add.outer(trunc.basis.eigenvalues, trunc.space.eigenvalues).ravel()
    lam_mat[np.diag_indices_from(lam_mat)] += 1.0 / (k0_diag - z)
    err = solve_right(lu, lam_mat)
    del lam_mat, lu
    err -= direct

    direct_norm = power_norm(direct)
    window = trunc.mode_window(edge)
    abs_res = power_norm(err[np.ix_(window, window)])
    info["full_rel_residual"] = power_norm(err) / direct_norm
    info["direct_norm"] = direct_norm
    return VerificationReport(z, abs_res, abs_res / direct_norm, cond, set(), tol, info)


def minimal_s0(drive, tol=1e-6, s_max=1e6, floor=1e-9):
    """Smallest ``s0`` where both perturbative validity conditions hold (bisection).

    Both left-hand sides decrease in ``s0``, so the admissible set is a
    half-line.  Returns ``floor`` when every positive ``s0`` is admissible.
    """
    g, gp = drive.sup_g, drive.sup_g_prime

    def ok(s):
        return validity_conditions(g, gp, s)[1]

    if ok(floor):
        return floor
    if not ok(s_max):
        raise Unattainable(f"no s0 <= {s_max:g} satisfies the validity conditions")
    lo, hi = floor, s_max
    while hi - lo > tol * max(1.0, lo):
        mid = np.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
