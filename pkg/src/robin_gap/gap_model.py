"""
Diagonal model of the resolvent gap on the unit disc.

On the n-th boundary mode (multiplicity 1 for n = 0, else 2) the operators act as scalars:

    D_inf           gamma^2 lambda_check
    D_beta          gamma^2 lambda_check beta / (beta + lambda_check)
    D_inf - D_beta  gamma^2 lambda_check^2 / (beta + lambda_check)
    K               gamma^2 lambda_check^2
    K'              -gamma^2 lambda_check^3 beta / (beta + lambda_check)

so that D_inf - D_beta = K / beta + K' / beta^2 exactly. Norms over the infinitely many modes
are reported as a finite sum over n <= n_max together with a rigorous tail bound, using
lambda_check^2 gamma^2 <= pi / (n + 1) and lambda_check > n.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import integrate

from robin_gap.dtn_circle import DtnMode, dtn_eigenvalue_real, dtn_mode, gamma_sq_real
from robin_gap.errors import DomainError

DEFAULT_N_MAX = 2000
MIN_N_MAX = 16
MIN_RATE_POINTS = 4
MIN_RATE_DECADES = 3.0
_LOG_SPAN = 80.0


@dataclass(frozen=True)
class DiagonalModel:
    modes: Tuple[DtnMode, ...]
    gamma_route: str = "closed"

    @property
    def n_max(self) -> int:
        return self.modes[-1].n

    @property
    def lambda_check(self) -> np.ndarray:
        return np.array([mode.lambda_check for mode in self.modes])

    @property
    def gamma_sq(self) -> np.ndarray:
        return np.array([mode.gamma_sq for mode in self.modes])

    @property
    def multiplicity(self) -> np.ndarray:
        return np.array([mode.multiplicity for mode in self.modes], dtype=float)

    def dinf_eigenvalues(self) -> np.ndarray:
        return self.gamma_sq * self.lambda_check

    def dbeta_eigenvalues(self, beta: float) -> np.ndarray:
        _check_beta(beta)
        lam = self.lambda_check
        return self.gamma_sq * lam * beta / (beta + lam)

    def gap_eigenvalues(self, beta: float) -> np.ndarray:
        _check_beta(beta)
        lam = self.lambda_check
        return self.gamma_sq * lam * lam / (beta + lam)

    def k_eigenvalues(self) -> np.ndarray:
        lam = self.lambda_check
        return self.gamma_sq * lam * lam

    def k_prime_eigenvalues(self, beta: float) -> np.ndarray:
        _check_beta(beta)
        lam = self.lambda_check
        return -self.gamma_sq * lam**3 * beta / (beta + lam)


@dataclass(frozen=True)
class OperatorNorm:
    value: float
    argmax: int
    tail_bound: float

    @property
    def certified(self) -> bool:
        return self.tail_bound < self.value


@dataclass(frozen=True)
class SchattenNorm:
    p: float
    value: float
    tail_bound: float
    tail_estimate: float

    @property
    def estimate(self) -> float:
        """Partial sum plus estimated tail; lies within [value, value + tail_bound]."""
        return self.value + self.tail_estimate

    @property
    def convergent(self) -> bool:
        return math.isfinite(self.tail_bound)


@dataclass(frozen=True)
class ExpansionRemainder:
    beta: float
    remainder_sup: float
    first_order_sup: float
    k_prime_norm: float
    k_prime_bound: float


@dataclass(frozen=True)
class RateFit:
    exponent: float
    log_constant: float
    r_squared: float
    beta_grid: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class LogLinearFit:
    slope: float
    intercept: float
    r_squared: float


def _check_beta(beta: float):
    if not (math.isfinite(beta) and beta > 0):
        raise DomainError(f"beta must be a positive finite real, got {beta!r}")


@lru_cache(maxsize=8)
def build_model(n_max: int = DEFAULT_N_MAX, gamma_route: str = "closed", m_trunc: int = 64) -> DiagonalModel:
    """DtN modes n = 0..n_max; a pure function of its arguments."""
    if n_max < MIN_N_MAX:
        raise DomainError(f"n_max must be at least {MIN_N_MAX}, got {n_max}")
    modes = tuple(dtn_mode(n, gamma_route, m_trunc) for n in range(n_max + 1))
    logging.debug(f"Built diagonal model with n_max={n_max} ({gamma_route} coupling weights)")
    return DiagonalModel(modes=modes, gamma_route=gamma_route)


def gap_mode_eigenvalue(mode: DtnMode, beta: float) -> float:
    """Eigenvalue of D_inf - D_beta on one mode: gamma^2 lambda_check^2 / (beta + lambda_check)."""
    _check_beta(beta)
    lam = mode.lambda_check
    return mode.gamma_sq * lam * lam / (beta + lam)


def _gap_majorant(x: float, beta: float) -> float:
    return math.pi / ((x + 1.0) * (beta + x))


def operator_norm_gap(model: DiagonalModel, beta: float) -> OperatorNorm:
    """Largest eigenvalue of D_inf - D_beta, with a bound on every mode beyond n_max."""
    gaps = model.gap_eigenvalues(beta)
    argmax = int(np.argmax(gaps))
    n_next = model.n_max + 1
    norm = OperatorNorm(value=float(gaps[argmax]), argmax=argmax, tail_bound=_gap_majorant(n_next, beta))
    if not norm.certified:
        logging.warning(f"Tail certificate failed at beta={beta:g}; increase n_max beyond {model.n_max}")
    return norm


def _log_integral(func: Callable[[float], float], start: float, points: Sequence[float] = ()) -> float:
    """Integral of func over [start, start * e^80] in the variable u = log x."""
    lo = math.log(start)
    hi = lo + _LOG_SPAN
    breaks = [math.log(x) for x in points if start < x < math.exp(hi)]
    value, _ = integrate.quad(
        lambda u: func(math.exp(u)) * math.exp(u),
        lo,
        hi,
        points=breaks or None,
        limit=400,
        epsabs=0.0,
        epsrel=1e-11,
    )
    return value


def _power_tail(p: float, start: float) -> float:
    """Integral of 2 (pi / x^2)^p over [start, inf)."""
    return 2.0 * math.pi**p * start ** (1.0 - 2.0 * p) / (2.0 * p - 1.0)


def _schatten(
    p: float,
    eigenvalues: np.ndarray,
    multiplicity: np.ndarray,
    n_max: int,
    majorant: Callable[[float], float],
    continuation: Callable[[float], float],
    points: Sequence[float] = (),
) -> SchattenNorm:
    if p < 0.5:
        raise DomainError(f"p must be at least 1/2, got {p}")
    partial = math.fsum((multiplicity * eigenvalues**p).tolist())
    value = partial ** (1.0 / p)
    if p <= 0.5:
        logging.warning(f"Schatten sum with p={p} diverges; only the partial sum is reported")
        return SchattenNorm(p=p, value=value, tail_bound=math.inf, tail_estimate=0.0)

    far = n_max * math.exp(_LOG_SPAN)
    bound_power = _log_integral(lambda x: 2.0 * majorant(x) ** p, float(n_max), points) + _power_tail(p, far)
    estimate_power = _log_integral(lambda x: 2.0 * continuation(x) ** p, n_max + 0.5, points) + _power_tail(
        p, (n_max + 0.5) * math.exp(_LOG_SPAN)
    )
    estimate_power = min(max(estimate_power, 0.0), bound_power)
    upper = (partial + bound_power) ** (1.0 / p)
    return SchattenNorm(
        p=p,
        value=value,
        tail_bound=upper - value,
        tail_estimate=(partial + estimate_power) ** (1.0 / p) - value,
    )


def schatten_norm_gap(model: DiagonalModel, beta: float, p: float) -> SchattenNorm:
    """
    Schatten p-norm of D_inf - D_beta. p = inf gives the operator norm. The sum converges for
    every p > 1/2.
    """
    if p == math.inf:
        norm = operator_norm_gap(model, beta)
        tail_bound = 0.0 if norm.certified else norm.tail_bound
        return SchattenNorm(p=p, value=norm.value, tail_bound=tail_bound, tail_estimate=0.0)

    def continuation(x: float) -> float:
        lam = dtn_eigenvalue_real(x)
        return gamma_sq_real(x) * lam * lam / (beta + lam)

    return _schatten(
        p,
        model.gap_eigenvalues(beta),
        model.multiplicity,
        model.n_max,
        lambda x: _gap_majorant(x, beta),
        continuation,
        points=(beta,),
    )


def schatten_norm_dinf(model: DiagonalModel, p: float) -> SchattenNorm:
    """
    Schatten p-norm of D_inf, whose eigenvalues are gamma^2 lambda_check; finite for p > 1/2
    since gamma^2 lambda_check <= pi / (n (n + 1)).
    """

    def continuation(x: float) -> float:
        return gamma_sq_real(x) * dtn_eigenvalue_real(x)

    return _schatten(
        p,
        model.dinf_eigenvalues(),
        model.multiplicity,
        model.n_max,
        lambda x: math.pi / (x * (x + 1.0)),
        continuation,
    )


def expansion_remainder_mode(mode: DtnMode, beta: float) -> float:
    """Remainder gap - gamma^2 lam^2 / beta + gamma^2 lam^3 / beta^2 on one mode, in closed form."""
    _check_beta(beta)
    lam = mode.lambda_check
    return mode.gamma_sq * lam**4 / (beta * beta * (beta + lam))


def expansion_remainder(model: DiagonalModel, beta: float) -> ExpansionRemainder:
    """
    Size of the second-order resolvent remainder together with the K' norm and its bound by
    the supremum of gamma^2 lambda_check^3.
    """
    _check_beta(beta)
    lam = model.lambda_check
    gsq = model.gamma_sq
    remainder = gsq * lam**4 / (beta * beta * (beta + lam))
    return ExpansionRemainder(
        beta=beta,
        remainder_sup=float(np.max(remainder)),
        first_order_sup=float(np.max(gsq * lam * lam / beta)),
        k_prime_norm=float(np.max(np.abs(model.k_prime_eigenvalues(beta)))),
        k_prime_bound=float(np.max(gsq * lam**3)),
    )


def _least_squares(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(residual**2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), min(r_squared, 1.0)


def _check_grid(points: Sequence[Tuple[float, float]], decades: float) -> Tuple[np.ndarray, np.ndarray]:
    if len(points) < MIN_RATE_POINTS:
        raise DomainError(f"Rate fits need at least {MIN_RATE_POINTS} points, got {len(points)}")
    betas = np.array([beta for beta, _ in points], dtype=float)
    values = np.array([value for _, value in points], dtype=float)
    if np.any(betas <= 0) or np.any(np.diff(betas) <= 0):
        raise DomainError("beta grid must be positive and strictly increasing")
    if math.log10(betas[-1] / betas[0]) < decades - 1e-9:
        raise DomainError(f"beta grid must span at least {decades:g} decades")
    return betas, values


def rate_fit(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least-squares slope of log(value) against log(beta)."""
    betas, values = _check_grid(points, MIN_RATE_DECADES)
    if np.any(values <= 0):
        raise DomainError("Rate fits need positive values")
    slope, intercept, r_squared = _least_squares(np.log(betas), np.log(values))
    return RateFit(exponent=slope, log_constant=intercept, r_squared=r_squared, beta_grid=betas.tolist())


def log_linear_fit(points: Sequence[Tuple[float, float]]) -> LogLinearFit:
    """Fit value = intercept + slope * log(beta)."""
    betas, values = _check_grid(points, 1.0)
    slope, intercept, r_squared = _least_squares(np.log(betas), values)
    return LogLinearFit(slope=slope, intercept=intercept, r_squared=r_squared)
