#!/usr/bin/env python3

"""
Tests for the roots module.
"""

import math

import pytest

from robin_gap.errors import BracketError
from robin_gap.roots import bisect, scan_brackets


def test_bisect_finds_root():
    root = bisect(math.cos, 0.0, 2.0)

    assert root.value == pytest.approx(math.pi / 2, abs=1e-12)
    assert root.lo <= root.value <= root.hi


def test_bisect_with_derivative_reaches_machine_precision():
    root = bisect(math.cos, 0.0, 2.0, fprime=lambda x: -math.sin(x))

    assert root.value == pytest.approx(math.pi / 2, abs=4e-16)
    assert root.residual < 1e-15


def test_bisect_bracket_straddles_sign_change():
    root = bisect(lambda x: x**3 - 2.0, 0.0, 3.0)

    assert (root.lo**3 - 2.0) * (root.hi**3 - 2.0) <= 0
    assert root.hi - root.lo <= 1e-13 * max(1.0, root.value) * 1.01


def test_bisect_exact_endpoint_zero():
    root = bisect(lambda x: x - 1.0, 1.0, 2.0)

    assert root.value == 1.0
    assert root.iterations == 0


def test_bisect_no_sign_change():
    with pytest.raises(BracketError):
        bisect(lambda x: x * x + 1.0, -1.0, 1.0)


def test_bisect_invalid_bracket():
    with pytest.raises(BracketError):
        bisect(math.sin, 2.0, 1.0)


def test_newton_polish_stays_inside_bracket():
    # A wildly wrong derivative would throw Newton far outside; the step must be rejected
    root = bisect(math.sin, 3.0, 3.5, fprime=lambda x: 1e-20)

    assert root.lo <= root.value <= root.hi
    assert root.value == pytest.approx(math.pi, abs=1e-12)


def test_scan_brackets_finds_consecutive_roots():
    brackets = scan_brackets(math.sin, 0.1, 0.4, 3, 20.0)

    assert len(brackets) == 3
    for k, (lo, hi) in enumerate(brackets, start=1):
        assert lo < k * math.pi < hi
        assert hi - lo == pytest.approx(0.4)


def test_scan_brackets_exact_sample_zero():
    brackets = scan_brackets(lambda x: x - 1.0, 0.0, 0.5, 1, 5.0)

    lo, hi = brackets[0]
    assert lo < 1.0 < hi


def test_scan_brackets_stop_reached():
    with pytest.raises(BracketError):
        scan_brackets(math.sin, 0.1, 0.4, 5, 6.0)
