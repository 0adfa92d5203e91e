"""
Dirichlet-to-Neumann spectrum of -Laplace + 1 on the unit circle and the coupling weights that
diagonalize the boundary-trace operators built on it.

The n-th boundary mode e^{+-in theta} has DtN eigenvalue lambda_check_n = n + I_{n+1}(1)/I_n(1).
Its Neumann-resolvent extension I_n(r)/I_n'(1) e^{+-in theta} has squared L2 norm gamma_n^2,
which equals the sum over m of theta_{n,m}^2.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from robin_gap.errors import DomainError, InterlacingError
from robin_gap.specfun import MAX_ZERO_ORDER, ZeroFamily, find_zero, modified_ratio, modified_ratio_cf

DEFAULT_M_TRUNC = 64
MIN_M_TRUNC = 8
MAX_DIAGNOSTIC_ORDER = 2000
MAX_CLOSED_ORDER = 9_999


@dataclass(frozen=True)
class DtnMode:
    n: int
    lambda_check: float
    gamma_sq: float
    gamma_sq_tail_bound: float = 0.0

    @property
    def multiplicity(self) -> int:
        return 1 if self.n == 0 else 2

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "lambda_check": self.lambda_check,
            "gamma_sq": self.gamma_sq,
            "gamma_sq_tail_bound": self.gamma_sq_tail_bound,
            "multiplicity": self.multiplicity,
        }


@dataclass(frozen=True)
class GammaSum:
    value: float
    tail_bound: float


@dataclass(frozen=True)
class BoundednessReport:
    s: float
    n_max: int
    sup: float
    argmax: int
    tail_trend: str
    tail_increments_shrinking: bool
    analytic_bound: float

    @property
    def bounded(self) -> bool:
        return self.tail_increments_shrinking and self.sup <= self.analytic_bound


def dtn_eigenvalue(n: int) -> float:
    """lambda_check_n = i J_n'(i)/J_n(i) = n + I_{n+1}(1)/I_n(1)."""
    return n + modified_ratio(n)


def dtn_eigenvalue_real(x: float) -> float:
    """Continuation of lambda_check to real order x >= 0."""
    return x + modified_ratio_cf(x)


def theta(n: int, m: int) -> float:
    """
    Coefficient of the m-th normalized Neumann mode in the extension of the n-th boundary mode:
    2 sqrt(pi) k' / ((1 + k'^2) sqrt(k'^2 - n^2)), with k' = k'_{n,m}.
    """
    k = find_zero(ZeroFamily.NEUMANN_J_PRIME, n, m).value
    if n == 0:
        return 2.0 * math.sqrt(math.pi) / (1.0 + k * k)
    if k * k <= n * n:
        raise InterlacingError(f"k'_({n},{m}) = {k} does not exceed the order {n}")
    return 2.0 * math.sqrt(math.pi) * k / ((1.0 + k * k) * math.sqrt((k - n) * (k + n)))


def _theta_sq_majorant(n: int, k: float) -> float:
    return 4.0 * math.pi / (k * k * (k - n) * (k + n))


def gamma_sq(n: int, m_trunc: int = DEFAULT_M_TRUNC) -> GammaSum:
    """
    Truncated sum of theta_{n,m}^2 over m <= m_trunc and a bound on the dropped terms.

    Beyond m_trunc the zeros satisfy k'_{n,m_trunc + j} > k'_{n,m_trunc} + pi (j - 1), because
    k'_{n,m} > k_{n,m-1} and zeros of J_n (n >= 1) or J_1 are more than pi apart. With
    theta^2 <= 4 pi / (k'^2 (k'^2 - n^2)) the tail is dominated by its first term plus an
    integral.
    """
    if m_trunc < MIN_M_TRUNC:
        raise DomainError(f"m_trunc must be at least {MIN_M_TRUNC}, got {m_trunc}")
    if n > MAX_ZERO_ORDER:
        raise DomainError(f"Series route supports n <= {MAX_ZERO_ORDER}, got {n}")
    value = math.fsum(theta(n, m) ** 2 for m in range(1, m_trunc + 1))
    a = find_zero(ZeroFamily.NEUMANN_J_PRIME, n, m_trunc).value
    integral = 4.0 / (3.0 * a**3 * (1.0 - (n / a) ** 2))
    return GammaSum(value=value, tail_bound=_theta_sq_majorant(n, a) + integral)


def _gamma_sq_from_ratios(lam: float, r: float, r_next: float) -> float:
    # pi ((1 + n^2) / lam^2 - 1), rewritten with 1 - 2 n r = r (2 + r_next) so nothing cancels
    return math.pi * r * (2.0 + r_next - r) / (lam * lam)


def gamma_sq_closed(n: int) -> float:
    """gamma_n^2 = pi ((1 + n^2) / lambda_check_n^2 - 1), evaluated stably."""
    if not isinstance(n, int) or n < 0 or n > MAX_CLOSED_ORDER:
        raise DomainError(f"n must be an integer in [0, {MAX_CLOSED_ORDER}], got {n!r}")
    r = modified_ratio(n)
    return _gamma_sq_from_ratios(n + r, r, modified_ratio(n + 1))


def gamma_sq_real(x: float) -> float:
    """Continuation of gamma^2 to real order, used for tail estimates."""
    r = modified_ratio_cf(x)
    return _gamma_sq_from_ratios(x + r, r, modified_ratio_cf(x + 1.0))


@lru_cache(maxsize=None)
def dtn_mode(n: int, route: str = "closed", m_trunc: int = DEFAULT_M_TRUNC) -> DtnMode:
    """
    DtnMode for order n. route="closed" uses the exact extension norm; route="series" sums
    theta^2 up to m_trunc and records the tail bound.
    """
    lam = dtn_eigenvalue(n)
    if route == "closed":
        return DtnMode(n=n, lambda_check=lam, gamma_sq=gamma_sq_closed(n))
    if route == "series":
        g = gamma_sq(n, m_trunc)
        return DtnMode(n=n, lambda_check=lam, gamma_sq=g.value, gamma_sq_tail_bound=g.tail_bound)
    raise DomainError(f"Unknown gamma route {route!r}")


def boundedness_diagnostics(n_max: int, s: float) -> BoundednessReport:
    """
    Supremum over n <= n_max of lambda_check_n^{2s} gamma_n^2, the norm squared of the
    s-th DtN power composed with the Neumann-resolvent trace.

    Since lambda_check^2 gamma^2 <= pi / (n + 1) and lambda_check < n + 1/2, the sequence is
    bounded by pi (n + 1/2)^{2s-2} / (n + 1), which stays bounded for s <= 3/2.
    """
    if n_max > MAX_DIAGNOSTIC_ORDER or n_max < 20:
        raise DomainError(f"n_max must be in [20, {MAX_DIAGNOSTIC_ORDER}], got {n_max}")
    if not 0.5 <= s <= 1.5:
        raise DomainError(f"s must lie in [1/2, 3/2], got {s}")
    values = np.array([dtn_eigenvalue(n) ** (2 * s) * gamma_sq_closed(n) for n in range(n_max + 1)])
    argmax = int(np.argmax(values))
    tail = values[-(n_max // 10) :]
    steps = np.diff(tail)
    if np.all(steps < 0):
        trend = "decreasing"
    elif np.all(steps > 0):
        trend = "increasing"
    else:
        trend = "mixed"
    shrinking = bool(np.all(np.abs(np.diff(steps)) <= np.abs(steps[:-1])))
    orders = np.arange(n_max + 1, dtype=float)
    analytic = float(np.max(math.pi * (orders + 0.5) ** (2 * s - 2) / (orders + 1.0)))
    if s == 1.5:
        analytic = max(analytic, math.pi)
    report = BoundednessReport(
        s=s,
        n_max=n_max,
        sup=float(values[argmax]),
        argmax=argmax,
        tail_trend=trend,
        tail_increments_shrinking=shrinking,
        analytic_bound=analytic,
    )
    logging.debug(f"Boundedness s={s}: sup={report.sup:.6g} at n={argmax}, tail {trend}")
    return report


def hilbert_schmidt_partial_sums(checkpoints: List[int]) -> List[Tuple[int, float]]:
    """
    Partial sums of mult * lambda_check^2 gamma^2 up to each checkpoint. They grow like
    2 pi log N, so the DtN-weighted trace operator is not Hilbert-Schmidt.
    """
    checkpoints = sorted(checkpoints)
    if checkpoints and checkpoints[-1] > MAX_CLOSED_ORDER:
        raise DomainError(f"Checkpoints must not exceed {MAX_CLOSED_ORDER}")
    result = []
    terms = []
    n = 0
    for checkpoint in checkpoints:
        while n <= checkpoint:
            mult = 1 if n == 0 else 2
            terms.append(mult * dtn_eigenvalue(n) ** 2 * gamma_sq_closed(n))
            n += 1
        result.append((checkpoint, math.fsum(terms)))
    return result


def dinf_trace(n_max: int) -> GammaSum:
    """
    Trace of the Neumann-minus-Dirichlet resolvent difference, sum of mult * lambda_check gamma^2,
    with the tail bound 2 pi / (n_max + 1) from lambda_check gamma^2 <= pi / (n (n + 1)).
    """
    terms = [(1 if n == 0 else 2) * dtn_eigenvalue(n) * gamma_sq_closed(n) for n in range(n_max + 1)]
    return GammaSum(value=math.fsum(terms), tail_bound=2.0 * math.pi / (n_max + 1))


def growth_exponent(k_lo: int = 10, k_hi: int = 500) -> float:
    """
    Least-squares slope of log lambda_check_k against log k, with the eigenvalues listed
    in increasing order and repeated according to multiplicity.
    """
    listed = [dtn_eigenvalue(0)]
    n = 1
    while len(listed) < k_hi:
        lam = dtn_eigenvalue(n)
        listed.extend([lam, lam])
        n += 1
    ks = np.arange(k_lo, k_hi + 1)
    lams = np.array(listed[k_lo - 1 : k_hi])
    slope, _ = np.polyfit(np.log(ks), np.log(lams), 1)
    return float(slope)
