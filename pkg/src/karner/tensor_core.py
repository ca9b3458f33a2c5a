"""Finite-dimensional resolvent formula for ``K = D x I + sum_j P_j x H_j``.

Tensor products use T-major ordering: the basis vector ``e_t x e_h`` sits at
index ``t * dim_H + h`` (exactly what :func:`numpy.kron` produces).

All routines are pure functions of their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import RCOND_THRESHOLD, guarded_inverse, lu_with_rcond, solve_right
from .errors import BadPartition, SingularFactor, SingularShift, SpectrumHit

Z_IN_SPECTRUM = "z_in_spectrum"
SINGULAR_FACTOR = "singular_factor"


def _eps_alg(dim):
    return 1e-12 * dim


@dataclass(frozen=True)
class ProjectorFamily:
    """Complete family of idempotents on a ``dim``-dimensional space.

    Members need not be Hermitian; only ``Q_k Q_k' = delta_kk' Q_k`` and
    ``sum_k Q_k = I`` are required.  The algebra is checked on construction
    at tolerance ``1e-12 * dim`` (override with ``eps``).
    """

    dim: int
    members: tuple
    eps: float | None = None

    def __post_init__(self):
        members = tuple(np.asarray(m, dtype=complex) for m in self.members)
        if not members:
            raise ValueError("a projector family needs at least one member")
        for m in members:
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"member shape {m.shape} does not match dim={self.dim}")
            m.setflags(write=False)
        object.__setattr__(self, "members", members)
        eps = _eps_alg(self.dim) if self.eps is None else self.eps
        defect = self.algebra_defect()
        if defect > eps:
            raise ValueError(f"projector algebra violated: defect {defect:.3e} > {eps:.3e}")

    def __len__(self):
        return len(self.members)

    def algebra_defect(self):
        """Largest spectral-norm defect among the idempotent and completeness relations."""
        worst = np.linalg.norm(sum(self.members) - np.eye(self.dim), 2)
        for i, qi in enumerate(self.members):
            for j, qj in enumerate(self.members):
                target = qi if i == j else 0.0
                worst = max(worst, np.linalg.norm(qi @ qj - target, 2))
        return float(worst)


@dataclass(frozen=True)
class KarnerModel:
    """Data ``(lambda_k, Q_k, P_j, H_0..H_N)`` defining ``D``, ``K_0``, ``K`` and ``Lambda(z)``."""

    dim_T: int
    dim_H: int
    lambdas: tuple
    q_family: ProjectorFamily
    p_family: ProjectorFamily
    h_ops: tuple

    def __post_init__(self):
        lambdas = tuple(complex(x) for x in self.lambdas)
        h_ops = tuple(np.asarray(h, dtype=complex) for h in self.h_ops)
        if self.q_family.dim != self.dim_T or self.p_family.dim != self.dim_T:
            raise ValueError("projector families must act on a space of dimension dim_T")
        if len(lambdas) != len(self.q_family):
            raise ValueError("need one eigenvalue per member of q_family")
        if len(h_ops) != len(self.p_family) + 1:
            raise ValueError("need H_0 plus one operator per member of p_family")
        for h in h_ops:
            if h.shape != (self.dim_H, self.dim_H):
                raise ValueError(f"operator shape {h.shape} does not match dim_H={self.dim_H}")
            h.setflags(write=False)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "h_ops", h_ops)

    @property
    def M(self):
        return len(self.lambdas)

    @property
    def N(self):
        return len(self.p_family)

    @property
    def dim(self):
        return self.dim_T * self.dim_H

    def with_h_ops(self, h_ops):
        return KarnerModel(self.dim_T, self.dim_H, self.lambdas, self.q_family, self.p_family, h_ops)


@dataclass
class VerificationReport:
    z: complex
    abs_residual: float
    rel_residual: float
    commutator_factor_condition: float
    flags: set = field(default_factory=set)
    tol: float = float("nan")
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.flags and self.rel_residual <= self.tol


def assemble_D(model):
    return sum(lam * q for lam, q in zip(model.lambdas, model.q_family.members))


def assemble_K0(model, z_shift=None):
    eye_h = np.eye(model.dim_H)
    k0 = np.kron(assemble_D(model), eye_h) + np.kron(np.eye(model.dim_T), model.h_ops[0])
    if z_shift is not None:
        k0 = k0 - z_shift * np.eye(model.dim)
    return k0


def assemble_K(model):
    k = np.kron(assemble_D(model), np.eye(model.dim_H))
    for p, h in zip(model.p_family.members, model.h_ops[1:]):
        k = k + np.kron(p, h)
    return k


def _shift_inverse(h, lam, z, j, k):
    shifted = h + (lam - z) * np.eye(h.shape[0])
    return guarded_inverse(shifted, lambda rc: SingularShift(j, k, rc))


def assemble_Lambda(model, z):
    """``sum_jk P_j Q_k x [(H_j + lambda_k - z)^-1 - (H_0 + lambda_k - z)^-1]``.

    Raises :class:`SingularShift` naming ``(j, k)`` when a shifted operator is
    numerically singular (reciprocal condition below ``1e-14``).
    """
    h0 = model.h_ops[0]
    r0 = [_shift_inverse(h0, lam, z, 0, k) for k, lam in enumerate(model.lambdas, start=1)]
    lam_mat = np.zeros((model.dim, model.dim), dtype=complex)
    for j, (p, h) in enumerate(zip(model.p_family.members, model.h_ops[1:]), start=1):
        for k, (lam, q) in enumerate(zip(model.lambdas, model.q_family.members), start=1):
            block = _shift_inverse(h, lam, z, j, k) - r0[k - 1]
            lam_mat += np.kron(p @ q, block)
    return lam_mat


def commutator_with_D(model, mat):
    """``[D x I, mat]``."""
    dx = np.kron(assemble_D(model), np.eye(model.dim_H))
    return dx @ mat - mat @ dx


def _karner_pieces(model, z):
    lam_mat = assemble_Lambda(model, z)
    # K0 - z is invertible whenever every H_0 + lambda_k - z is (checked above).
    r0 = guarded_inverse(assemble_K0(model, z), SpectrumHit)
    factor = np.eye(model.dim) + commutator_with_D(model, lam_mat)
    lu, rcond = lu_with_rcond(factor)
    return lam_mat, r0, lu, rcond


def karner_resolvent(model, z):
    """Right-hand side ``((K0 - z)^-1 + Lambda(z)) (I + [D x I, Lambda(z)])^-1``."""
    lam_mat, r0, lu, rcond = _karner_pieces(model, z)
    if rcond < RCOND_THRESHOLD:
        raise SingularFactor(rcond)
    return solve_right(lu, r0 + lam_mat)


def direct_resolvent(model, z):
    return guarded_inverse(assemble_K(model) - z * np.eye(model.dim), SpectrumHit)


def verify_karner(model, z, tol=1e-9):
    """Compare the resolvent formula against direct inversion of ``K - z``.

    Never raises for singular configurations; they are reported through
    ``flags`` with NaN residuals.
    """
    flags = set()
    cond = float("nan")
    direct = rhs = None
    try:
        direct = direct_resolvent(model, z)
    except SpectrumHit:
        flags.add(Z_IN_SPECTRUM)
    try:
        lam_mat, r0, lu, rcond = _karner_pieces(model, z)
        cond = float("inf") if rcond == 0.0 else 1.0 / rcond
        if rcond < RCOND_THRESHOLD:
            flags.add(SINGULAR_FACTOR)
        else:
            rhs = solve_right(lu, r0 + lam_mat)
    except (SingularShift, SpectrumHit) as exc:
        # j == 0 means z lies in the spectrum of K_0; j >= 1 is a pole of Lambda alone
        if isinstance(exc, SpectrumHit) or exc.j == 0:
            flags.add(Z_IN_SPECTRUM)
        else:
            flags.add(SINGULAR_FACTOR)
    if direct is None or rhs is None:
        return VerificationReport(z, float("nan"), float("nan"), cond, flags, tol)
    abs_res = float(np.linalg.norm(rhs - direct, 2))
    rel_res = abs_res / float(np.linalg.norm(direct, 2))
    return VerificationReport(z, abs_res, rel_res, cond, flags, tol)


def verify_intermediate(model, z):
    """Normalized residual of ``K0 - K = (Lambda (D x I) + (sum_j P_j x (H_j - z)) Lambda)(K0 - z)``."""
    lam_mat = assemble_Lambda(model, z)
    eye_h = np.eye(model.dim_H)
    k0 = assemble_K0(model)
    k = assemble_K(model)
    dx = np.kron(assemble_D(model), eye_h)
    coupling = sum(
        np.kron(p, h - z * eye_h) for p, h in zip(model.p_family.members, model.h_ops[1:])
    )
    rhs = (lam_mat @ dx + coupling @ lam_mat) @ (k0 - z * np.eye(model.dim))
    diff = k0 - k
    return float(np.linalg.norm(diff - rhs, 2) / (1.0 + np.linalg.norm(diff, 2)))


def _random_unitary(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_similarity(rng, n, hermitian):
    # U diag(e^s) V with s in [-1, 1] keeps cond(S) <= e^2
    u = _random_unitary(rng, n)
    if hermitian:
        return u, u.conj().T
    s = u @ np.diag(np.exp(rng.uniform(-1.0, 1.0, n))) @ _random_unitary(rng, n)
    return s, np.linalg.inv(s)


def _partition(rng, dim, parts):
    cuts = np.sort(rng.choice(np.arange(1, dim), size=parts - 1, replace=False))
    return np.diff(np.concatenate(([0], cuts, [dim])))


def _random_family(rng, dim, parts, hermitian):
    sizes = _partition(rng, dim, parts)
    s, s_inv = _random_similarity(rng, dim, hermitian)
    members = []
    start = 0
    for size in sizes:
        e = np.zeros((dim, dim))
        e[start:start + size, start:start + size] = np.eye(size)
        start += size
        members.append(s @ e @ s_inv)
    return ProjectorFamily(dim, tuple(members))


def _random_operator(rng, n, hermitian):
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    return (x + x.conj().T) / 2 if hermitian else x


def random_model(dim_T, dim_H, M, N, seed, hermitian=False):
    """Random :class:`KarnerModel` with generically non-commuting projector families.

    Both families are coordinate block projectors conjugated by independent
    random similarities (unitaries when ``hermitian``).  Eigenvalues
    ``lambda_k`` are uniform in the unit disc (real in ``[-1, 1]`` when
    ``hermitian``); ``H_j`` are complex Gaussian matrices scaled by
    ``1/sqrt(dim_H)`` (Hermitian parts when ``hermitian``).
    """
    for name, parts in (("M", M), ("N", N)):
        if not 1 <= parts <= dim_T:
            raise BadPartition(f"{name}={parts} must lie in [1, dim_T={dim_T}]")
    rng = np.random.default_rng(seed)
    q_family = _random_family(rng, dim_T, M, hermitian)
    p_family = _random_family(rng, dim_T, N, hermitian)
    if hermitian:
        lambdas = rng.uniform(-1.0, 1.0, M).astype(complex)
    else:
        lambdas = np.sqrt(rng.uniform(0.0, 1.0, M)) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, M))
    h_ops = tuple(_random_operator(rng, dim_H, hermitian) for _ in range(N + 1))
    return KarnerModel(dim_T, dim_H, tuple(lambdas), q_family, p_family, h_ops)
