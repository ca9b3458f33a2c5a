"""Guarded dense factorizations and a power-iteration norm estimate."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

RCOND_THRESHOLD = 1e-14


def lu_with_rcond(a):
    """LU-factor ``a`` and return ``(lu_piv, rcond)`` with a 1-norm rcond estimate."""
    a = np.asarray(a, dtype=complex)
    anorm = np.abs(a).sum(axis=0).max() if a.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    if not np.all(np.isfinite(lu)) or anorm == 0.0:
        return (lu, piv), 0.0
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0:
        return (lu, piv), 0.0
    return (lu, piv), float(rcond)


def guarded_inverse(a, on_singular, threshold=RCOND_THRESHOLD):
    """Dense inverse of ``a``; calls ``on_singular(rcond)`` (which must raise) below threshold."""
    lu, rcond = lu_with_rcond(a)
    if rcond < threshold:
        raise on_singular(rcond)
    n = lu[0].shape[0]
    return sla.lu_solve(lu, np.eye(n, dtype=complex), check_finite=False)


def solve_right(lu, b):
    """Return ``b @ inv(A)`` given the LU factors of ``A``."""
    return sla.lu_solve(lu, b.T, trans=1, check_finite=False).T


def power_norm(a, max_iter=200, rtol=1e-10, seed=0):
    """Estimate the spectral norm of ``a`` by power iteration on ``a^H a``.

    ``a`` is a dense array or anything exposing ``matvec``/``rmatvec`` and
    ``shape``.  The start vector is drawn from a fixed seed so the estimate
    is reproducible.  The result never exceeds the true norm (up to rounding).
    """
    if hasattr(a, "matvec"):
        matvec, rmatvec, ncols = a.matvec, a.rmatvec, a.shape[1]
    else:
        a = np.asarray(a)
        matvec = a.__matmul__
        rmatvec = a.conj().T.__matmul__
        ncols = a.shape[1]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(ncols) + 1j * rng.standard_normal(ncols)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(max_iter):
        y = matvec(x)
        new_sigma = float(np.linalg.norm(y))
        if new_sigma == 0.0:
            return 0.0
        x = rmatvec(y)
        x /= np.linalg.norm(x)
        if abs(new_sigma - sigma) <= rtol * new_sigma:
            sigma = new_sigma
            break
        sigma = new_sigma
    return float(np.linalg.norm(matvec(x)))
