"""Exception hierarchy shared by the numerical modules."""


class KarnerError(ArithmeticError):
    """Base class for every numerical failure raised by this package."""


class SingularShift(KarnerError):
    """Some ``H_j + lambda_k - z`` is numerically singular.

    ``j == 0`` refers to the unperturbed operator ``H_0``.
    """

    def __init__(self, j, k, rcond):
        self.j = j
        self.k = k
        self.rcond = rcond
        super().__init__(f"H_{j} + lambda_{k} - z is singular (rcond={rcond:.3e})")


class SingularFactor(KarnerError):
    """``I + [D x I, Lambda(z)]`` cannot be inverted reliably."""

    def __init__(self, rcond):
        self.rcond = rcond
        super().__init__(f"commutator factor is singular (rcond={rcond:.3e})")


class SpectrumHit(KarnerError):
    """``z`` lies (numerically) in the spectrum of ``K``."""

    def __init__(self, rcond):
        self.rcond = rcond
        super().__init__(f"K - z is singular (rcond={rcond:.3e})")


class BadPartition(KarnerError, ValueError):
    pass


class NearPole(KarnerError):
    """``z`` is within the guard distance of a Neumann eigenvalue ``n^2 pi^2``."""

    def __init__(self, z, n, k=None):
        self.z = z
        self.n = n
        self.k = k
        where = "" if k is None else f" (Fourier shift k={k})"
        super().__init__(f"z={z!r} is too close to the eigenvalue (n*pi)^2 with n={n}{where}")


class KreinPole(KarnerError):
    """``1 + g tau R_0(z) tau*`` vanishes: ``z`` is an eigenvalue of ``H_g``."""

    def __init__(self, g, z, k=None):
        self.g = g
        self.z = z
        self.k = k
        where = "" if k is None else f" (Fourier shift k={k})"
        super().__init__(f"Krein denominator vanishes for g={g!r}, z={z!r}{where}")


class RealAxis(KarnerError, ValueError):
    pass


class NonPositive(KarnerError, ValueError):
    pass


class RadiusViolation(KarnerError):
    """The Neumann series in ``g`` is not guaranteed to converge."""


class SeriesDivergence(KarnerError):
    pass


class Unattainable(KarnerError):
    pass
