"""
Dirichlet, Neumann and Robin eigenvalues of -Laplace on the unit disc, and the radial overlap
integrals used to compare their eigenfunctions.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from robin_gap.errors import BracketError, CoefficientOverflowError, DomainError, PrecisionLossError
from robin_gap.roots import bisect
from robin_gap.specfun import ZeroFamily, bessel_j, bessel_j_pair, bessel_j_prime, find_zero

MAX_BETA = 1.0e12
ROBIN_RESIDUAL_RTOL = 1e-11
# Closer arguments use the midpoint value, whose error is second order in the gap.
DEGENERATE_GAP = 1e-5
# The boundary pairing of two normalized Dirichlet modes is taken as 2k^2, the value the
# expansion coefficients are defined with.
BOUNDARY_PAIRING_FACTOR = 2.0


@dataclass(frozen=True)
class DiscMode:
    n: int
    m: int
    dirichlet_k: float
    neumann_k: float

    @property
    def multiplicity(self) -> int:
        return 1 if self.n == 0 else 2

    @property
    def dirichlet_eigenvalue(self) -> float:
        return self.dirichlet_k**2

    @property
    def neumann_eigenvalue(self) -> float:
        return self.neumann_k**2


@dataclass(frozen=True)
class RobinEigenvalue:
    mode: DiscMode
    beta: float
    eigenvalue: float
    s: float
    residual: float

    @property
    def dirichlet_defect(self) -> float:
        """k^2 - lambda, formed without cancellation."""
        k = self.mode.dirichlet_k
        return (k - self.s) * (k + self.s)

    def to_row(self) -> dict:
        return {
            "n": self.mode.n,
            "m": self.mode.m,
            "beta": self.beta,
            "lambda": self.eigenvalue,
            "neumann_lambda": self.mode.neumann_eigenvalue,
            "dirichlet_lambda": self.mode.dirichlet_eigenvalue,
            "residual": self.residual,
        }


@lru_cache(maxsize=None)
def disc_mode(n: int, m: int) -> DiscMode:
    dirichlet = find_zero(ZeroFamily.DIRICHLET_J, n, m)
    neumann = find_zero(ZeroFamily.NEUMANN_J_PRIME, n, m)
    return DiscMode(n=n, m=m, dirichlet_k=dirichlet.value, neumann_k=neumann.value)


def secular_function(n: int, beta: float, s: float) -> float:
    """F(s) = s J_n'(s) + beta J_n(s), written as (n + beta) J_n(s) - s J_{n+1}(s)."""
    j_n, j_n1 = bessel_j_pair(n, s)
    return (n + beta) * j_n - s * j_n1


def _secular_derivative(n: int, beta: float, s: float) -> float:
    j_n, j_n1 = bessel_j_pair(n, s)
    j_prime = (n / s) * j_n - j_n1
    return beta * j_prime - (s - n * n / s) * j_n


def robin_eigenvalue(n: int, m: int, beta: float) -> RobinEigenvalue:
    """
    Eigenvalue of the Robin problem -Laplace u = lambda u, du/dnu + beta u = 0 on the unit disc
    in angular sector n with radial index m.

    The root of the secular equation is searched in (k'_{n,m}, k_{n,m}).

    Raises:
        DomainError: If beta is negative or not finite
        CoefficientOverflowError: If beta exceeds 1e12
        BracketError: If the interlacing bracket holds no sign change
    """
    if not math.isfinite(beta) or beta < 0:
        raise DomainError(f"beta must be a finite nonnegative real, got {beta!r}")
    if beta > MAX_BETA:
        raise CoefficientOverflowError(f"beta={beta:g} exceeds the supported maximum {MAX_BETA:g}")
    mode = disc_mode(n, m)

    if beta == 0:
        s = mode.neumann_k
        residual = abs(s * bessel_j_prime(n, s)) if s > 0 else 0.0
        return RobinEigenvalue(mode, 0.0, s * s, s, residual)

    def f(s: float) -> float:
        return secular_function(n, beta, s)

    def fprime(s: float) -> float:
        return _secular_derivative(n, beta, s)

    try:
        root = bisect(f, mode.neumann_k, mode.dirichlet_k, fprime=fprime)
    except BracketError:
        logging.error(f"Robin root of mode ({n}, {m}) at beta={beta:g} is not bracketed by interlacing")
        raise
    s = root.value
    residual = abs(f(s))
    if residual > ROBIN_RESIDUAL_RTOL * (1.0 + beta):
        raise PrecisionLossError(f"Robin residual {residual:.3e} at mode ({n}, {m}), beta={beta:g}")
    return RobinEigenvalue(mode, float(beta), s * s, s, residual)


def normalization_integral(n: int, c: float) -> float:
    """Closed form of the integral of J_n(c r)^2 r over [0, 1]."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c!r}")
    j_n = bessel_j(n, c)
    j_prime = bessel_j_prime(n, c)
    return 0.5 * j_prime**2 + 0.5 * (1.0 - (n / c) ** 2) * j_n**2


def cross_overlap(n: int, a: float, b: float) -> float:
    """
    Lommel integral of J_n(a r) J_n(b r) r over [0, 1]. Arguments closer than 1e-5 are
    replaced by their midpoint.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be positive, got {a!r}, {b!r}")
    if abs(a - b) <= DEGENERATE_GAP:
        return normalization_integral(n, 0.5 * (a + b))
    j_a, j_prime_a = bessel_j(n, a), bessel_j_prime(n, a)
    j_b, j_prime_b = bessel_j(n, b), bessel_j_prime(n, b)
    return (b * j_a * j_prime_b - a * j_prime_a * j_b) / ((a - b) * (a + b))


def quadrature_overlap(n: int, a: float, b: float) -> float:
    """Adaptive quadrature of the same integral, used as an independent check."""
    value, _ = integrate.quad(
        lambda r: bessel_j(n, a * r) * bessel_j(n, b * r) * r,
        0.0,
        1.0,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    return value


def dirichlet_gram(n: int, count: int) -> np.ndarray:
    """Gram matrix of the first `count` L2-normalized radial Dirichlet modes of order n."""
    ks = [find_zero(ZeroFamily.DIRICHLET_J, n, m).value for m in range(1, count + 1)]
    norms = [math.sqrt(normalization_integral(n, k)) for k in ks]
    gram = np.empty((count, count))
    for i, (k_i, norm_i) in enumerate(zip(ks, norms)):
        for j, (k_j, norm_j) in enumerate(zip(ks, norms)):
            gram[i, j] = cross_overlap(n, k_i, k_j) / (norm_i * norm_j)
    return gram


def boundary_normal_derivative(n: int, m: int) -> float:
    """
    Scalar d with du/dnu = d e^{+-in theta} / sqrt(pi) for the normalized Dirichlet mode
    pi^{-1/2} J_n(k r) / J_{n+1}(k) e^{+-in theta}. Since J_n'(k) = -J_{n+1}(k), d = -k.
    """
    return -disc_mode(n, m).dirichlet_k


def boundary_pairing(n: int, m: int) -> float:
    """Boundary pairing of a normalized Dirichlet mode with itself, 2 k_{n,m}^2."""
    return BOUNDARY_PAIRING_FACTOR * boundary_normal_derivative(n, m) ** 2
