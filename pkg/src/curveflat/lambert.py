"""Real Lambert W on the principal branch and the ``-1`` branch."""

from __future__ import annotations

import math
from enum import IntEnum

INV_E = math.exp(-1.0)
_MAX_ITER = 50


class Branch(IntEnum):
    PRINCIPAL = 0
    MINUS1 = -1


class LambertDomainError(ValueError):
    pass


def _branch_point_series(p: float) -> float:
    # W = -1 + p - p^2/3 + 11/72 p^3 - 43/540 p^4, p = +-sqrt(2(e a + 1))
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)))


def _initial_guess(branch: Branch, a: float) -> float:
    near_branch_point = a + INV_E < 0.25
    if branch is Branch.MINUS1:
        if near_branch_point:
            return _branch_point_series(-math.sqrt(2.0 * (math.e * a + 1.0)))
        l1 = math.log(-a)
        l2 = math.log(-l1)
        return l1 - l2 + l2 / l1
    if near_branch_point:
        return _branch_point_series(math.sqrt(2.0 * (math.e * a + 1.0)))
    if a < 3.0:
        return math.log1p(a) * (1.0 - math.log1p(math.log1p(a)) / (2.0 + math.log1p(a)))
    l1 = math.log(a)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def _minus1_tiny(a: float) -> float:
    # Newton on w + ln(-w) = ln(-a); avoids exp(w) underflow for subnormal a.
    target = math.log(-a)
    w = _initial_guess(Branch.MINUS1, a)
    for _ in range(_MAX_ITER):
        step = (w + math.log(-w) - target) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * abs(w):
            break
    return w


def lambert_w(branch: Branch | int, a: float) -> float:
    """Solve ``w * exp(w) = a`` for real ``w`` on the given branch.

    The principal branch is defined for ``a >= -1/e`` and returns ``w >= -1``;
    the ``-1`` branch is defined for ``-1/e <= a < 0`` and returns
    ``w <= -1``.
    """
    branch = Branch(branch)
    a = float(a)
    if math.isnan(a) or a < -INV_E:
        raise LambertDomainError(f"W_{int(branch)} undefined at a={a!r}")
    if a == -INV_E:
        return -1.0
    if branch is Branch.MINUS1:
        if a >= 0.0:
            raise LambertDomainError(f"W_-1 undefined at a={a!r}")
        if a > -1e-10:
            return _minus1_tiny(a)
    elif a == 0.0:
        return 0.0
    elif math.isinf(a):
        return math.inf

    w = _initial_guess(branch, a)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - a
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-15 * abs(w):
            break
    if branch is Branch.MINUS1:
        return min(w, -1.0)
    return max(w, -1.0)
