"""The volume-ratio bound ``F`` and pointwise sandwich evaluators.

``F(s)`` is the least value of ``(x - 1)^2 + (y - 1)^2`` over ``x, y > 0``
with ``x y = s``::

    F(s) = 1 - 2 s            for 0 <= s <= 1/4
    F(s) = 2 (sqrt(s) - 1)^2  for s >= 1/4

It is convex, C^1 (``F'(1/4) = -2`` from both sides) and vanishes only at 1.
``F**(p/2)`` is the lower bound for the p-distortion energy of an injective
map whose image occupies the fraction ``s`` of the domain area.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from . import mat2
from .errors import NegativeDeterminant, NegativeRatio, PowerBelowTwo
from .mat2 import Mat2

THRESHOLD = 0.25


def _check_ratio(s, strict=False):
    bad = np.asarray(s) <= 0 if strict else np.asarray(s) < 0
    if np.any(bad) or np.any(np.isnan(s)):
        raise NegativeRatio(f"volume ratio must be {'> 0' if strict else '>= 0'}, got {s}")


def _unwrap(x, like):
    return float(x) if np.ndim(like) == 0 else x


def F(s):
    """Bound function; accepts a scalar or an array of ratios ``s >= 0``.

    Negative ratios are rejected; callers holding quadrature round-off must
    clamp explicitly.
    """
    _check_ratio(s)
    a = np.asarray(s, dtype=float)
    out = np.where(a <= THRESHOLD, 1.0 - 2.0 * a, 2.0 * (np.sqrt(a) - 1.0) ** 2)
    return _unwrap(out, s)


def F_prime(s):
    _check_ratio(s, strict=True)
    a = np.asarray(s, dtype=float)
    out = np.where(a <= THRESHOLD, -2.0, 2.0 * (1.0 - 1.0 / np.sqrt(a)))
    return _unwrap(out, s)


def F_pow(s, p: float):
    """``F(s) ** (p / 2)``; only ``p >= 2`` is supported since below that
    ``F**(p/2)`` stops being convex."""
    if p < 2:
        raise PowerBelowTwo(f"p must be >= 2, got {p}")
    val = np.asarray(F(s)) ** (0.5 * p)
    return _unwrap(val, s)


class Sandwich(NamedTuple):
    lower: Optional[float]
    mid: float
    upper: float

    def margin(self) -> float:
        """Smallest of ``mid - lower`` and ``upper - mid``; negative means violated."""
        gaps = [self.upper - self.mid]
        if self.lower is not None:
            gaps.append(self.mid - self.lower)
        return min(gaps)

    def ordered(self, tol: float = 0.0) -> bool:
        return self.margin() >= -tol


def sandwich_K(A: Mat2) -> Sandwich:
    """``(dist^2(A,K), dist^2(A,SO2) - (1 - 2 det A), 2 dist^2(A,K))``.

    The middle member is evaluated from its definition; algebraically it
    equals ``(sigma1 + sigma2 - 1)^2``.
    """
    if A.det < 0:
        raise NegativeDeterminant(f"det A = {A.det} < 0")
    s1, s2 = mat2.singular_values(A)
    dk2 = float(mat2.dist_K_sq_sigma(s1, s2))
    dso2 = (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2
    return Sandwich(dk2, dso2 - (1.0 - 2.0 * A.det), 2.0 * dk2)


def sandwich_CO(A: Mat2) -> Sandwich:
    """``((sqrt s2 - sqrt s1)^4, dist^2(A,SO2) - 2 (sqrt det - 1)^2, 2 dist^2(A,CO2))``.

    The ordering holds for ``det A >= 1/4``.  Below that only the right
    inequality is valid and ``lower`` is returned as ``None``.
    """
    s1, s2 = mat2.singular_values(A)
    det = A.det
    if det < 0:
        raise NegativeDeterminant(f"det A = {det} < 0")
    dso2 = (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2
    mid = dso2 - 2.0 * (math.sqrt(det) - 1.0) ** 2
    upper = 2.0 * mat2.dist_CO2(A) ** 2
    lower = (math.sqrt(s2) - math.sqrt(s1)) ** 4 if det >= THRESHOLD else None
    return Sandwich(lower, mid, upper)


# batch forms used by the random-matrix suites

def batch_sandwich_K(A: np.ndarray):
    if np.any(mat2.batch_det(A) < 0):
        raise NegativeDeterminant("some matrix has det < 0")
    s1, s2 = mat2.batch_singular_values(A)
    dk2 = mat2.dist_K_sq_sigma(s1, s2)
    mid = (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2 - (1.0 - 2.0 * mat2.batch_det(A))
    return dk2, mid, 2.0 * dk2


def batch_sandwich_CO(A: np.ndarray):
    """Members for a stack; ``lower`` is only meaningful where ``det >= 1/4``."""
    if np.any(mat2.batch_det(A) < 0):
        raise NegativeDeterminant("some matrix has det < 0")
    s1, s2 = mat2.batch_singular_values(A)
    det = mat2.batch_det(A)
    mid = (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2 - 2.0 * (np.sqrt(det) - 1.0) ** 2
    lower = (np.sqrt(s2) - np.sqrt(s1)) ** 4
    upper = 2.0 * mat2.batch_dist_CO2_sq(A)
    return lower, mid, upper
