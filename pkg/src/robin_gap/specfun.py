"""
Real special functions needed on the unit disc: Bessel J of integer order and of order +-1/3,
derivatives, the modified-Bessel ratio I_{n+1}(1)/I_n(1), zeros of the Airy function on the
negative axis, and certified zeros of J_n and J_n'.

Everything here is pure. Zero tables are memoised per (family, order); the k-th zero only
depends on the fixed scan, so the cache never changes a result.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

from robin_gap.errors import BracketError, DomainError, InterlacingError, PrecisionLossError
from robin_gap.roots import bisect, scan_brackets

MAX_ORDER = 2048
MAX_ARGUMENT = 1.0e4
MAX_ZERO_ORDER = 512
MAX_ZERO_INDEX = 200
MAX_AIRY_INDEX = 50
MAX_RATIO_ORDER = 10_000

SERIES_RTOL = 1e-18
ZERO_SCAN_STEP = 0.4
ZERO_RESIDUAL_RTOL = 1e-12
RATIO_AGREEMENT_RTOL = 1e-13
HANKEL_THRESHOLD = 17.0
AIRY_SCAN_START = 0.5
AIRY_SCAN_STEP = 0.1

_TABLE_BLOCK = 16


class ZeroFamily(str, Enum):
    DIRICHLET_J = "dirichlet"
    NEUMANN_J_PRIME = "neumann"


@dataclass(frozen=True)
class BesselZero:
    family: ZeroFamily
    order: int
    index: int
    value: float
    bracket: Tuple[float, float]
    residual: float

    def to_row(self) -> dict:
        return {
            "family": self.family.value,
            "n": self.order,
            "m": self.index,
            "value": self.value,
            "residual": self.residual,
            "bracket_lo": self.bracket[0],
            "bracket_hi": self.bracket[1],
        }


@dataclass(frozen=True)
class AiryZero:
    index: int
    value: float
    residual: float


def _check_order(n: int, limit: int = MAX_ORDER):
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise DomainError(f"Order must be a nonnegative integer, got {n!r}")
    if n > limit:
        raise DomainError(f"Order {n} exceeds the supported maximum {limit}")


def _check_argument(x: float):
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"Argument must be a finite nonnegative real, got {x!r}")
    if x > MAX_ARGUMENT:
        raise DomainError(f"Argument {x} exceeds the supported maximum {MAX_ARGUMENT}")


def _use_series(n: int, x: float) -> bool:
    # Terms of the power series decrease from the first one exactly when (x/2)^2 <= n + 1,
    # so the alternating sum suffers no cancellation there.
    return 0.25 * x * x <= n + 1


def _series_j(n: int, x: float) -> float:
    half = 0.5 * x
    log_prefactor = n * math.log(half) - math.lgamma(n + 1) if n else 0.0
    if log_prefactor < -740.0:
        return 0.0
    prefactor = 1.0
    for j in range(1, n + 1):
        prefactor *= half / j

    q = -half * half
    term = 1.0
    terms = [term]
    partial = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (n + k))
        terms.append(term)
        partial += term
        if abs(term) < SERIES_RTOL * abs(partial):
            break
    return prefactor * math.fsum(terms)


def _miller_pair(n: int, x: float) -> Tuple[float, float]:
    """J_n(x) and J_{n+1}(x) by normalized backward recurrence."""
    top = max(n + 1, int(math.ceil(x)))
    start = top + 30 + int(math.sqrt(60.0 * top))
    start += start % 2

    two_over_x = 2.0 / x
    j_above = 0.0
    j_here = 1.0e-30
    j_n = j_n1 = 0.0
    even_terms = []
    for j in range(start, 0, -1):
        j_below = j * two_over_x * j_here - j_above
        j_above, j_here = j_here, j_below
        order = j - 1
        if order == n + 1:
            j_n1 = j_here
        elif order == n:
            j_n = j_here
        if order > 0 and order % 2 == 0:
            even_terms.append(j_here)
        if abs(j_here) > 1.0e250:
            # Rescale everything recorded so far together with the recurrence state
            j_here *= 1.0e-250
            j_above *= 1.0e-250
            j_n *= 1.0e-250
            j_n1 *= 1.0e-250
            even_terms = [t * 1.0e-250 for t in even_terms]
    norm = j_here + 2.0 * math.fsum(even_terms)
    return j_n / norm, j_n1 / norm


def _pair(n: int, x: float) -> Tuple[float, float]:
    if x == 0.0:
        return (1.0 if n == 0 else 0.0), 0.0
    if _use_series(n, x):
        return _series_j(n, x), _series_j(n + 1, x)
    return _miller_pair(n, x)


def bessel_j(n: int, x: float) -> float:
    """
    Bessel function of the first kind J_n(x) for integer n >= 0 and real x >= 0.

    Raises:
        DomainError: For negative or oversized arguments
    """
    _check_order(n)
    _check_argument(x)
    return _pair(n, x)[0]


def bessel_j_pair(n: int, x: float) -> Tuple[float, float]:
    """(J_n(x), J_{n+1}(x)) from a single evaluation."""
    _check_order(n)
    _check_argument(x)
    return _pair(n, x)


def bessel_j_prime(n: int, x: float) -> float:
    """
    Derivative J_n'(x) = (n/x) J_n(x) - J_{n+1}(x).

    At x = 0 the limits are returned: 1/2 for n = 1, otherwise 0.
    """
    _check_order(n)
    _check_argument(x)
    if x == 0.0:
        return 0.5 if n == 1 else 0.0
    j_n, j_n1 = _pair(n, x)
    return (n / x) * j_n - j_n1


def bessel_j_second(n: int, x: float) -> float:
    """J_n''(x) from Bessel's equation."""
    _check_order(n)
    _check_argument(x)
    if x == 0.0:
        raise DomainError("J_n'' is evaluated for x > 0 only")
    j_n, j_n1 = _pair(n, x)
    j_prime = (n / x) * j_n - j_n1
    return -j_prime / x - (1.0 - (n * n) / (x * x)) * j_n


def _series_j_fractional(nu: float, z: float) -> float:
    half = 0.5 * z
    term = half**nu / math.gamma(nu + 1.0)
    terms = [term]
    partial = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        terms.append(term)
        partial += term
        if abs(term) < SERIES_RTOL * abs(partial) and k > 2:
            break
    return math.fsum(terms)


def _hankel_j_fractional(nu: float, z: float) -> float:
    mu = 4.0 * nu * nu
    p_terms = [1.0]
    q_terms = []
    a = 1.0
    k = 0
    while True:
        k += 1
        a_next = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(a_next) > abs(a) or abs(a_next) < 1e-17:
            break
        a = a_next
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q_terms.append(sign * a)
        else:
            p_terms.append(sign * a)
    chi = z - (0.5 * nu + 0.25) * math.pi
    p, q = math.fsum(p_terms), math.fsum(q_terms)
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j_third(sign: int, z: float) -> float:
    """J_{1/3}(z) for sign=+1 and J_{-1/3}(z) for sign=-1, z > 0."""
    if sign not in (1, -1):
        raise DomainError(f"Only orders +1/3 and -1/3 are supported, got sign={sign!r}")
    if not math.isfinite(z) or z <= 0:
        raise DomainError(f"Argument must be positive, got {z!r}")
    nu = sign / 3.0
    if z <= HANKEL_THRESHOLD:
        return _series_j_fractional(nu, z)
    return _hankel_j_fractional(nu, z)


def airy_ai_negative(x: float) -> float:
    """Ai(-x) for x > 0 through the combination of J_{1/3} and J_{-1/3}."""
    zeta = (2.0 / 3.0) * x**1.5
    return math.sqrt(x) / 3.0 * (bessel_j_third(1, zeta) + bessel_j_third(-1, zeta))


@lru_cache(maxsize=None)
def airy_negative_zero(m: int) -> AiryZero:
    """
    The m-th positive root a_m of Ai(-x) = 0.

    Raises:
        DomainError: If m is not in [1, 50]
        BracketError: If the scan window does not contain m sign changes
    """
    if not isinstance(m, int) or not 1 <= m <= MAX_AIRY_INDEX:
        raise DomainError(f"Airy zero index must be in [1, {MAX_AIRY_INDEX}], got {m!r}")
    t = 3.0 * math.pi * (4 * m - 1) / 8.0
    guess = t ** (2.0 / 3.0) * (1.0 + 5.0 / (48.0 * t * t))
    brackets = scan_brackets(airy_ai_negative, AIRY_SCAN_START, AIRY_SCAN_STEP, m, guess + 1.0)
    lo, hi = brackets[m - 1]
    root = bisect(airy_ai_negative, lo, hi)
    return AiryZero(index=m, value=root.value, residual=abs(airy_ai_negative(root.value)))


def airy_zero_bounds(n: int, m: int) -> Tuple[float, float]:
    """Two-sided Airy-zero bounds on k_{n,m} valid for n, m >= 1."""
    if n < 1 or m < 1:
        raise DomainError("Airy-zero bounds hold for n, m >= 1")
    a = airy_negative_zero(m).value
    lower = n + 2.0 ** (-1.0 / 3.0) * a * n ** (1.0 / 3.0)
    return lower, lower + 0.3 * a * a * n ** (-1.0 / 3.0)


def _scan_stop(n: int, count: int) -> float:
    return n + math.pi * (count + 2) + 3.0 * (count + 1) ** (2.0 / 3.0) * max(n, 1) ** (1.0 / 3.0) + 10.0


@lru_cache(maxsize=None)
def _zero_table(family: ZeroFamily, n: int, count: int) -> Tuple[BesselZero, ...]:
    if family is ZeroFamily.DIRICHLET_J:

        def f(x: float) -> float:
            return bessel_j(n, x)

        def fprime(x: float) -> float:
            return bessel_j_prime(n, x)

    else:

        def f(x: float) -> float:
            return bessel_j_prime(n, x)

        def fprime(x: float) -> float:
            return bessel_j_second(n, x)

    start = float(n)
    brackets = scan_brackets(f, start, ZERO_SCAN_STEP, count, _scan_stop(n, count))
    zeros = []
    for index, (lo, hi) in enumerate(brackets, start=1):
        root = bisect(f, lo, hi, fprime=fprime)
        residual = abs(f(root.value))
        if residual > ZERO_RESIDUAL_RTOL * max(1.0, root.value):
            raise PrecisionLossError(
                f"Zero ({family.value}, {n}, {index}) residual {residual:.3e} exceeds tolerance"
            )
        zeros.append(BesselZero(family, n, index, root.value, (root.lo, root.hi), residual))
    logging.debug(f"Computed {count} {family.value} zeros of order {n}")
    return tuple(zeros)


def _raw_zero(family: ZeroFamily, n: int, m: int) -> BesselZero:
    if family is ZeroFamily.NEUMANN_J_PRIME and n == 0:
        if m == 1:
            return BesselZero(family, 0, 1, 0.0, (-ZERO_SCAN_STEP, ZERO_SCAN_STEP), 0.0)
        # J_0' = -J_1, so k'_{0,m} = k_{1,m-1}
        z = _raw_zero(ZeroFamily.DIRICHLET_J, 1, m - 1)
        return BesselZero(family, 0, m, z.value, z.bracket, z.residual)
    count = _TABLE_BLOCK * -(-m // _TABLE_BLOCK)
    return _zero_table(family, n, count)[m - 1]


def _check_interlacing(zero: BesselZero):
    n, m = zero.order, zero.index
    if zero.family is ZeroFamily.DIRICHLET_J:
        below = _raw_zero(ZeroFamily.NEUMANN_J_PRIME, n, m).value
        above = _raw_zero(ZeroFamily.NEUMANN_J_PRIME, n, m + 1).value
    else:
        if n == 0 and m == 1:
            return
        below = _raw_zero(ZeroFamily.DIRICHLET_J, n, m - 1).value if m > 1 else float(n)
        above = _raw_zero(ZeroFamily.DIRICHLET_J, n, m).value
        if m == 1 and not below <= zero.value:
            raise InterlacingError(f"k'_({n},1) = {zero.value} is below the order {n}")
        if m == 1:
            below = math.nextafter(below, -math.inf)
    if not below < zero.value < above:
        raise InterlacingError(
            f"Zero ({zero.family.value}, {n}, {m}) = {zero.value} not strictly between {below} and {above}"
        )


def find_zero(family: ZeroFamily, n: int, m: int) -> BesselZero:
    """
    The m-th positive zero of J_n (DIRICHLET_J) or of J_n' (NEUMANN_J_PRIME), with
    k'_{0,1} = 0 by convention.

    Raises:
        DomainError: If n > 512, m > 200 or m < 1
        BracketError: If the scan fails to find the zero
        InterlacingError: If the zero is not interlaced with its neighbours
    """
    family = ZeroFamily(family)
    _check_order(n, MAX_ZERO_ORDER)
    if not isinstance(m, int) or not 1 <= m <= MAX_ZERO_INDEX:
        raise DomainError(f"Zero index must be in [1, {MAX_ZERO_INDEX}], got {m!r}")
    try:
        zero = _raw_zero(family, n, m)
    except BracketError:
        logging.error(f"Failed to bracket zero ({family.value}, {n}, {m})")
        raise
    _check_interlacing(zero)
    return zero


def clear_zero_cache():
    """Drop memoized zero tables and Airy zeros."""
    _zero_table.cache_clear()
    airy_negative_zero.cache_clear()


def _ratio_series(n: int) -> float:
    def scaled_sum(order: int) -> float:
        term = 1.0
        terms = [term]
        k = 0
        while term >= SERIES_RTOL * terms[0]:
            k += 1
            term /= 4.0 * k * (order + k)
            terms.append(term)
        return math.fsum(terms)

    return scaled_sum(n + 1) / (2.0 * (n + 1) * scaled_sum(n))


def modified_ratio_cf(x: float, depth: int = 30) -> float:
    """
    I_{x+1}(1)/I_x(1) for real x >= 0 by the backward continued fraction
    r(x) = 1 / (2(x + 1) + r(x + 1)).
    """
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"Order must be a finite nonnegative real, got {x!r}")
    r = 0.0
    for j in range(depth, -1, -1):
        r = 1.0 / (2.0 * (x + j + 1.0) + r)
    return r


def modified_ratio(n: int) -> float:
    """
    I_{n+1}(1)/I_n(1), from the power series of J_n(i) and checked against the continued
    fraction.

    Raises:
        PrecisionLossError: If the two routes disagree beyond 1e-13 relative
    """
    _check_order(n, MAX_RATIO_ORDER)
    series = _ratio_series(n)
    continued = modified_ratio_cf(float(n))
    if abs(series - continued) > RATIO_AGREEMENT_RTOL * abs(series):
        logging.warning(f"Modified Bessel ratio routes disagree at n={n}: {series!r} vs {continued!r}")
        raise PrecisionLossError(f"Modified Bessel ratio routes disagree at n={n}")
    return series
