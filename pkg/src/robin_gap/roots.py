"""
Bracketed root finding.

Roots are located by counting sign changes on a scan, narrowed by bisection so the bracket
always certifies a sign change, then polished with at most a couple of Newton steps that are
only accepted while they stay inside the bracket.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from robin_gap.errors import BracketError

Func = Callable[[float], float]

BISECT_RTOL = 1e-13
NEWTON_POLISH_STEPS = 2
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class Root:
    value: float
    lo: float
    hi: float
    residual: float
    iterations: int


def _sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def bisect(
    func: Func,
    lo: float,
    hi: float,
    fprime: Optional[Func] = None,
    rtol: float = BISECT_RTOL,
    polish_steps: int = NEWTON_POLISH_STEPS,
) -> Root:
    """
    Find a root of func in (lo, hi).

    Args:
        func: Continuous function with a sign change on [lo, hi]
        lo, hi: Bracket endpoints, lo < hi
        fprime: Optional derivative used for the Newton polish
        rtol: Bisection stops once hi - lo <= rtol * max(1, |midpoint|)
        polish_steps: Newton steps tried after bisection

    Returns:
        Root whose (lo, hi) bracket still straddles a sign change of func

    Raises:
        BracketError: If func does not change sign on [lo, hi]
    """
    if not lo < hi:
        raise BracketError(f"Invalid bracket ({lo}, {hi})")
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0.0:
        return Root(lo, lo, lo, 0.0, 0)
    if f_hi == 0.0:
        return Root(hi, hi, hi, 0.0, 0)
    if _sign(f_lo) == _sign(f_hi):
        raise BracketError(f"No sign change on ({lo}, {hi}): f={f_lo:.3e}, {f_hi:.3e}")

    s_lo = _sign(f_lo)
    iterations = 0
    while hi - lo > rtol * max(1.0, abs(0.5 * (lo + hi))) and iterations < MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = func(mid)
        iterations += 1
        if f_mid == 0.0:
            return Root(mid, lo, hi, 0.0, iterations)
        if _sign(f_mid) == s_lo:
            lo = mid
        else:
            hi = mid

    x = 0.5 * (lo + hi)
    f_x = func(x)
    if fprime is not None:
        for _ in range(polish_steps):
            d = fprime(x)
            if d == 0.0 or not math.isfinite(d):
                break
            candidate = x - f_x / d
            if not lo < candidate < hi:
                break
            f_candidate = func(candidate)
            if abs(f_candidate) > abs(f_x):
                break
            x, f_x = candidate, f_candidate
            iterations += 1
            if f_x == 0.0:
                break

    return Root(x, lo, hi, abs(f_x), iterations)


def scan_brackets(func: Func, start: float, step: float, count: int, stop: float) -> List[Tuple[float, float]]:
    """
    Walk from start in increments of step and collect the first `count` intervals on which
    func changes sign. A sample that hits zero exactly is split into a tiny bracket around it.

    Raises:
        BracketError: If fewer than `count` sign changes are found before `stop`
    """
    brackets: List[Tuple[float, float]] = []
    x_prev = start
    f_prev = func(x_prev)
    k = 0
    while len(brackets) < count:
        k += 1
        x = start + k * step
        if x > stop:
            raise BracketError(f"Found {len(brackets)} of {count} sign changes on [{start}, {stop}]")
        f = func(x)
        if f == 0.0:
            eps = step * 1e-6
            brackets.append((x - eps, x + eps))
            x += eps
            f = func(x)
        elif _sign(f) != _sign(f_prev) and f_prev != 0.0:
            brackets.append((x_prev, x))
        x_prev, f_prev = x, f
    logging.debug(f"Scan from {start} found {count} brackets after {k} steps")
    return brackets
