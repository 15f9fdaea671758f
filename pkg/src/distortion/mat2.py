"""Closed-form analysis of real 2x2 matrices.

Singular values, cofactor, polar factor and the Frobenius distances to the
wells used throughout the package:

* ``SO2``  rotations,
* ``CO2``  conformal matrices ``lam * Q`` with ``lam >= 0``,
* ``K``    matrices with ``det >= 0`` whose singular values sum to one,
* ``K_s``  the ``det == s`` slice of ``K`` (``0 <= s <= 1/4``),
* ``K_sigma`` the orbit ``U diag(sigma1, sigma2) V`` with ``U, V`` in SO2.

Everything is computed from the entries.  For ``A = [[a, b], [c, d]]`` with
``det A >= 0``::

    sigma1 + sigma2 = hypot(a + d, c - b) = sqrt(|A|^2 + 2 det A)
    sigma2 - sigma1 = hypot(a - d, b + c) = sqrt(|A|^2 - 2 det A)

The ``hypot`` forms are never negative, so no clamping of radicands is
needed, and they keep full relative accuracy for nearly conformal matrices.

Two layers are provided: scalar functions on :class:`Mat2`, and ``batch_*``
functions on ``ndarray`` of shape ``(..., 2, 2)`` used by the quadrature and
property-check code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional

import numpy as np

from .errors import (
    NegativeDeterminant,
    NonpositiveDeterminant,
    ParameterOutOfRange,
    ZeroMatrix,
)

DEFAULT_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SingularPair:
    """Ordered singular values ``0 <= sigma1 <= sigma2``."""

    sigma1: float
    sigma2: float

    def __post_init__(self):
        if not (self.sigma1 >= 0.0):
            raise ParameterOutOfRange(f"sigma1 must be >= 0, got {self.sigma1}")
        if self.sigma1 > self.sigma2:
            raise ParameterOutOfRange(
                f"sigma1 <= sigma2 required, got ({self.sigma1}, {self.sigma2})"
            )

    def __iter__(self) -> Iterator[float]:
        yield self.sigma1
        yield self.sigma2

    @property
    def sum(self) -> float:
        return self.sigma1 + self.sigma2

    @property
    def product(self) -> float:
        return self.sigma1 * self.sigma2


@dataclass(frozen=True)
class Mat2:
    """Real 2x2 matrix ``[[a11, a12], [a21, a22]]``."""

    a11: float
    a12: float
    a21: float
    a22: float

    @classmethod
    def from_array(cls, a) -> "Mat2":
        a = np.asarray(a, dtype=float)
        if a.shape != (2, 2):
            raise ValueError(f"expected shape (2, 2), got {a.shape}")
        return cls(float(a[0, 0]), float(a[0, 1]), float(a[1, 0]), float(a[1, 1]))

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def diag(cls, x: float, y: float) -> "Mat2":
        return cls(float(x), 0.0, 0.0, float(y))

    @classmethod
    def rotation(cls, theta: float) -> "Mat2":
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, -s, s, c)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def frob2(self) -> float:
        """Squared Frobenius norm ``|A|^2``."""
        return self.a11**2 + self.a12**2 + self.a21**2 + self.a22**2

    @property
    def norm(self) -> float:
        return math.sqrt(self.frob2)

    @cached_property
    def sigma(self) -> SingularPair:
        return singular_values(self)

    @property
    def T(self) -> "Mat2":
        return Mat2(self.a11, self.a21, self.a12, self.a22)

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.a11 + other.a11, self.a12 + other.a12,
                    self.a21 + other.a21, self.a22 + other.a22)

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.a11 - other.a11, self.a12 - other.a12,
                    self.a21 - other.a21, self.a22 - other.a22)

    def __mul__(self, k: float) -> "Mat2":
        return Mat2(k * self.a11, k * self.a12, k * self.a21, k * self.a22)

    __rmul__ = __mul__

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )


# ---------------------------------------------------------------------------
# scalar API
# ---------------------------------------------------------------------------

def _sum_diff(A: Mat2) -> tuple[float, float]:
    s = math.hypot(A.a11 + A.a22, A.a21 - A.a12)
    d = math.hypot(A.a11 - A.a22, A.a12 + A.a21)
    if A.det < 0:
        s, d = d, s
    return s, d


def singular_values(A: Mat2) -> SingularPair:
    s, d = _sum_diff(A)
    return SingularPair(max(0.5 * (s - d), 0.0), 0.5 * (s + d))


def cofactor(A: Mat2) -> Mat2:
    """``Cof [[a, b], [c, d]] = [[d, -c], [-b, a]]``, so ``A Cof(A)^T = det(A) Id``."""
    return Mat2(A.a22, -A.a21, -A.a12, A.a11)


def _require_nonneg_det(A: Mat2) -> None:
    if A.det < 0:
        raise NegativeDeterminant(f"det A = {A.det} < 0")


def polar_factor(A: Mat2) -> Mat2:
    """Rotation closest to ``A`` in the Frobenius norm, ``(A + Cof A) / (sigma1 + sigma2)``.

    For ``det A > 0`` this is the orthogonal factor of ``A = O P``.  For
    ``det A == 0`` the nearest rotation is not unique and this returns one
    of them.
    """
    _require_nonneg_det(A)
    s, _ = _sum_diff(A)
    if s == 0.0:
        raise ZeroMatrix("polar factor of the zero matrix is undefined")
    c = (A.a11 + A.a22) / s
    t = (A.a21 - A.a12) / s
    return Mat2(c, -t, t, c)


def dist_SO2(A: Mat2) -> float:
    _require_nonneg_det(A)
    s1, s2 = singular_values(A)
    return math.hypot(s1 - 1.0, s2 - 1.0)


def dist_CO2(A: Mat2) -> float:
    _require_nonneg_det(A)
    _, d = _sum_diff(A)
    return d / _SQRT2


def dist_K_sigma(A: Mat2, target: SingularPair) -> float:
    _require_nonneg_det(A)
    s1, s2 = singular_values(A)
    return math.hypot(s1 - target.sigma1, s2 - target.sigma2)


def Ks_pair(s: float) -> SingularPair:
    """Singular values of the slice ``K_s``: the roots of ``x (1 - x) = s``."""
    if not (0.0 <= s <= 0.25):
        raise ParameterOutOfRange(f"s must lie in [0, 1/4], got {s}")
    r = math.sqrt(1.0 - 4.0 * s)
    return SingularPair(0.5 - 0.5 * r, 0.5 + 0.5 * r)


def dist_Ks(A: Mat2, s: float) -> float:
    return dist_K_sigma(A, Ks_pair(s))


def dist_K(A: Mat2) -> float:
    _require_nonneg_det(A)
    s1, s2 = singular_values(A)
    return math.sqrt(float(dist_K_sq_sigma(s1, s2)))


def dist_K_sq_sigma(s1, s2):
    """``dist^2`` from the singular-value pair to K; works elementwise on arrays."""
    # projection of (s1, s2) onto the segment from (0, 1) to (1/2, 1/2)
    near = 0.5 * (s1 + s2 - 1.0) ** 2
    far = s1**2 + (s2 - 1.0) ** 2
    return np.where(s2 <= s1 + 1.0, near, far)


class WellKind(enum.Enum):
    SO2 = "SO2"
    CO2 = "CO2"
    K = "K"
    Ks = "Ks"
    KSigma = "KSigma"


@dataclass(frozen=True)
class Well:
    kind: WellKind
    s: Optional[float] = None
    pair: Optional[SingularPair] = None

    def __post_init__(self):
        if self.kind is WellKind.Ks and not (self.s is not None and 0.0 <= self.s <= 0.25):
            raise ParameterOutOfRange(f"K_s requires s in [0, 1/4], got {self.s}")
        if self.kind is WellKind.KSigma and self.pair is None:
            raise ParameterOutOfRange("K_sigma requires a singular pair")


def dist_to_well(A: Mat2, well: Well) -> float:
    if well.kind is WellKind.SO2:
        return dist_SO2(A)
    if well.kind is WellKind.CO2:
        return dist_CO2(A)
    if well.kind is WellKind.K:
        return dist_K(A)
    if well.kind is WellKind.Ks:
        return dist_Ks(A, well.s)
    return dist_K_sigma(A, well.pair)


class CofKind(enum.Enum):
    IN_K = "InK"
    CONFORMAL = "Conformal"
    NEITHER = "Neither"


@dataclass(frozen=True)
class CofRelation:
    kind: CofKind
    sigma: Optional[float] = None


def classify_cof_relation(A: Mat2, tol: float = DEFAULT_TOL) -> CofRelation:
    """Relation between ``A - O(A)`` and ``Cof A``.

    ``A`` is in K exactly when ``A + Cof A`` is a rotation (and then equals
    ``O(A)``); otherwise ``A - O(A)`` is a multiple of ``Cof A`` only when
    ``A`` is conformal.  A conformal matrix with ``sigma == 1/2`` lies in K
    and is reported as ``IN_K``.
    """
    if A.det <= 0:
        raise NonpositiveDeterminant(f"det A = {A.det} <= 0")
    s, d = _sum_diff(A)
    if abs(s - 1.0) <= tol:
        # A + Cof A = s * O(A), so the direct test is |s - 1| * sqrt(2)
        resid = (A + cofactor(A) - polar_factor(A)).norm
        assert resid <= _SQRT2 * tol + 1e-12, resid
        return CofRelation(CofKind.IN_K)
    if d <= tol:
        return CofRelation(CofKind.CONFORMAL, 0.5 * s)
    return CofRelation(CofKind.NEITHER)


# ---------------------------------------------------------------------------
# batch API on arrays of shape (..., 2, 2)
# ---------------------------------------------------------------------------

def batch_det(A: np.ndarray) -> np.ndarray:
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def batch_cofactor(A: np.ndarray) -> np.ndarray:
    out = np.empty_like(A)
    out[..., 0, 0] = A[..., 1, 1]
    out[..., 0, 1] = -A[..., 1, 0]
    out[..., 1, 0] = -A[..., 0, 1]
    out[..., 1, 1] = A[..., 0, 0]
    return out


def _batch_sum_diff(A: np.ndarray):
    a, b, c, d = A[..., 0, 0], A[..., 0, 1], A[..., 1, 0], A[..., 1, 1]
    s = np.hypot(a + d, c - b)
    t = np.hypot(a - d, b + c)
    neg = batch_det(A) < 0
    return np.where(neg, t, s), np.where(neg, s, t)


def batch_singular_values(A: np.ndarray):
    """Return arrays ``(sigma1, sigma2)`` for a stack of matrices."""
    A = np.asarray(A, dtype=float)
    s, d = _batch_sum_diff(A)
    return np.maximum(0.5 * (s - d), 0.0), 0.5 * (s + d)


def _batch_require_nonneg(A: np.ndarray) -> None:
    if np.any(batch_det(A) < 0):
        raise NegativeDeterminant("some matrix has det < 0")


def batch_polar_factor(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    _batch_require_nonneg(A)
    s, _ = _batch_sum_diff(A)
    if np.any(s == 0.0):
        raise ZeroMatrix("polar factor of the zero matrix is undefined")
    c = (A[..., 0, 0] + A[..., 1, 1]) / s
    t = (A[..., 1, 0] - A[..., 0, 1]) / s
    return np.stack([np.stack([c, -t], -1), np.stack([t, c], -1)], -2)


def batch_dist_SO2_sq(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    _batch_require_nonneg(A)
    s1, s2 = batch_singular_values(A)
    return (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2


def batch_dist_CO2_sq(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    _batch_require_nonneg(A)
    _, d = _batch_sum_diff(A)
    return 0.5 * d**2


def batch_dist_K_sq(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    _batch_require_nonneg(A)
    s1, s2 = batch_singular_values(A)
    return dist_K_sq_sigma(s1, s2)


def batch_dist_Ks_sq(A: np.ndarray, s) -> np.ndarray:
    """``dist^2(A, K_s)``; ``s`` broadcasts against the matrix stack."""
    A = np.asarray(A, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 0.25)):
        raise ParameterOutOfRange("s must lie in [0, 1/4]")
    _batch_require_nonneg(A)
    s1, s2 = batch_singular_values(A)
    r = np.sqrt(1.0 - 4.0 * s)
    return (s1 - (0.5 - 0.5 * r)) ** 2 + (s2 - (0.5 + 0.5 * r)) ** 2
