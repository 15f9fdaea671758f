"""Radial-profile maps of the plane and their differentials.

A radial map acts in polar coordinates as ``(r, theta) -> (scale * psi(r),
theta + h(r))``.  With respect to the orthonormal polar frames at source and
image its differential is::

    scale * [[psi'(r),          0       ],
             [h'(r) * psi(r),   psi(r)/r]]

so ``det = scale**2 * psi' psi / r`` and the singular values depend on ``r``
only.  The Cartesian differential at ``(r, theta)`` is
``R(theta + h) @ frame @ R(theta).T``.

Provided constructions:

* :func:`homothety` / :func:`identity_map`,
* :class:`TwistMap`, ``(r, theta) -> (scale * r, theta + c log r)``, whose
  frame differential is the constant ``scale * [[1, 0], [c, 1]]``,
* :func:`build_twist_minimizer`, the twist whose differential lies in K,
* :func:`build_ode_minimizer`, a radial self-map of the unit disk with
  ``sigma1 + sigma2 = alpha`` everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from . import mat2
from .errors import (
    AlphaTooSmall,
    BisectionFailed,
    LambdaOutOfRange,
    ParameterOutOfRange,
    RadiusOutOfDomain,
)
from .mat2 import Mat2

EPS_RADIUS = 1e-12
ODE_GRID = 4096

Profile = Callable[[np.ndarray], np.ndarray]


def _zero(r):
    return np.zeros_like(np.asarray(r, dtype=float))


def _one(r):
    return np.ones_like(np.asarray(r, dtype=float))


def _ident(r):
    return np.asarray(r, dtype=float) * 1.0


@dataclass(frozen=True)
class RadialMap:
    """``(r, theta) -> (scale * psi(r), theta + h(r))`` on ``inner_radius <= r <= outer_radius``.

    The four profile callables must accept arrays.  ``inner_radius > 0``
    marks an annular (punctured) domain.
    """

    psi: Profile = field(repr=False)
    dpsi: Profile = field(repr=False)
    h: Profile = field(default=_zero, repr=False)
    dh: Profile = field(default=_zero, repr=False)
    inner_radius: float = 0.0
    outer_radius: float = math.inf
    scale: float = 1.0
    name: str = "radial"
    punctured: bool = False
    params: Dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterOutOfRange(f"scale must be > 0, got {self.scale}")
        if self.inner_radius < 0:
            raise ParameterOutOfRange(f"inner radius must be >= 0, got {self.inner_radius}")

    def scaled(self, lam: float) -> "RadialMap":
        """Compose with the homothety ``x -> lam * x``."""
        return replace(self, scale=self.scale * lam, params=dict(self.params),
                       name=f"{self.name}*{lam:g}")

    def frame_entries(self, r) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=float)
        _check_frame_radius(self, r)
        p = self.psi(r)
        k = self.scale
        return k * self.dpsi(r), np.zeros_like(r), k * self.dh(r) * p, k * p / r

    def polar_image(self, r, theta):
        r = np.asarray(r, dtype=float)
        return self.scale * self.psi(r), np.asarray(theta, dtype=float) + self.h(r)


@dataclass(frozen=True)
class TwistMap:
    """``(r, theta) -> (scale * r, theta + c log r)``, not differentiable at 0."""

    c: float
    scale: float = 1.0

    inner_radius = 0.0
    outer_radius = math.inf
    punctured = True

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterOutOfRange(f"scale must be > 0, got {self.scale}")

    @property
    def name(self) -> str:
        return f"twist(c={self.c:g},scale={self.scale:g})"

    @property
    def params(self) -> Dict[str, float]:
        return {"c": self.c, "scale": self.scale}

    @property
    def matrix(self) -> Mat2:
        return Mat2(self.scale, 0.0, self.scale * self.c, self.scale)

    @property
    def sigma(self) -> mat2.SingularPair:
        return mat2.singular_values(self.matrix)

    def scaled(self, lam: float) -> "TwistMap":
        return TwistMap(self.c, self.scale * lam)

    def inverse(self) -> "TwistMap":
        """Inverse map; equal to the ``-c`` twist when ``scale == 1``."""
        if self.scale == 1.0:
            return TwistMap(-self.c)
        raise NotImplementedError("inverse is only provided for unscaled twists")

    def as_radial(self) -> RadialMap:
        c = self.c
        return RadialMap(_ident, _one, lambda r: c * np.log(r), lambda r: c / np.asarray(r, float),
                         scale=self.scale, name=self.name, punctured=True, params=self.params)

    def frame_entries(self, r):
        r = np.asarray(r, dtype=float)
        _check_frame_radius(self, r)
        k = self.scale
        full = np.full_like(r, k)
        return full, np.zeros_like(r), np.full_like(r, k * self.c), full.copy()

    def polar_image(self, r, theta):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            twist = np.where(r > 0, self.c * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return self.scale * r, np.asarray(theta, dtype=float) + twist


AnyMap = Union[RadialMap, TwistMap]


def _check_frame_radius(m, r) -> None:
    lo = max(m.inner_radius, EPS_RADIUS)
    if np.any(~(r > lo)) or np.any(r > m.outer_radius * (1.0 + 1e-12)):
        raise RadiusOutOfDomain(
            f"{m.name}: radius must lie in ({lo}, {m.outer_radius}], got range "
            f"[{np.min(r)}, {np.max(r)}]"
        )


def _check_eval_radius(m, r) -> None:
    ok = (r >= m.inner_radius) & (r <= m.outer_radius * (1.0 + 1e-12))
    if m.inner_radius > 0:
        ok &= r > 0
    if not np.all(ok):
        raise RadiusOutOfDomain(
            f"{m.name}: radius must lie in [{m.inner_radius}, {m.outer_radius}], got range "
            f"[{np.min(r)}, {np.max(r)}]"
        )


@dataclass(frozen=True)
class FrameDifferential:
    matrix: Mat2
    r: float
    theta: float

    @property
    def jacobian(self) -> float:
        return self.matrix.det


def frame_differential(m: AnyMap, r: float, theta: float = 0.0) -> FrameDifferential:
    a, b, c, d = (float(v) for v in m.frame_entries(np.asarray(float(r))))
    return FrameDifferential(Mat2(a, b, c, d), float(r), float(theta))


def frame_field(m: AnyMap, r) -> np.ndarray:
    """Frame differentials at radii ``r`` as an array of shape ``r.shape + (2, 2)``."""
    a, b, c, d = m.frame_entries(r)
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


def _rot(t):
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def cartesian_differential(m: AnyMap, x, y) -> np.ndarray:
    """``d phi`` in Cartesian coordinates at the points ``(x, y)``; shape ``(..., 2, 2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    F = frame_field(m, r)
    _, image_theta = m.polar_image(r, theta)
    return _rot(image_theta) @ F @ np.swapaxes(_rot(theta), -1, -2)


def evaluate_polar(m: AnyMap, r, theta):
    r = np.asarray(r, dtype=float)
    _check_eval_radius(m, r)
    return m.polar_image(r, theta)


def evaluate_cartesian(m: AnyMap, x, y):
    """Image of ``(x, y)``; scalars in, floats out, arrays in, arrays out."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho, t = evaluate_polar(m, np.hypot(x, y), np.arctan2(y, x))
    X, Y = rho * np.cos(t), rho * np.sin(t)
    if X.ndim == 0:
        return float(X), float(Y)
    return X, Y


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def radial_map(psi: Profile, dpsi: Profile, h: Optional[Profile] = None, dh: Optional[Profile] = None,
               **kwargs) -> RadialMap:
    return RadialMap(psi, dpsi, h or _zero, dh or _zero, **kwargs)


def homothety(lam: float) -> RadialMap:
    return RadialMap(_ident, _one, scale=lam, name=f"homothety({lam:g})", params={"lambda": lam})


def identity_map() -> RadialMap:
    return RadialMap(_ident, _one, name="identity")


def twist_lambda(c: float) -> float:
    """Scale that puts the ``c`` twist into K: ``1 / sqrt(4 + c**2)``."""
    return 1.0 / math.hypot(2.0, c)


def twist_for_lambda(lam: float) -> float:
    if not 0.0 < lam <= 0.5:
        raise LambdaOutOfRange(f"a K-valued twist exists only for 0 < lambda <= 1/2, got {lam}")
    return math.sqrt(max(1.0 / lam**2 - 4.0, 0.0))


def build_twist_minimizer(lam: float) -> TwistMap:
    """Twist with ``sigma1 + sigma2 = 1`` and ``det = lam**2`` at every point."""
    return TwistMap(twist_for_lambda(lam), lam)


# ---------------------------------------------------------------------------
# ODE-built minimizer
# ---------------------------------------------------------------------------

# increasing steps with S(0) = 0, S(1) = 1.  "cubic" vanishes to second
# order at 0, which leaves h'' with a jump at t0 (the map is C^{1,1} there);
# "septic" vanishes to sixth order and makes the map C^2.
STEPS = {
    "cubic": lambda u: u * u * (3.0 - 2.0 * u),
    "septic": lambda u: u**6 * (7.0 - 6.0 * u),
}


def _decay_integral(beta: float, S=STEPS["cubic"]) -> float:
    val, _ = quad(lambda u: math.exp(-beta * S(u)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def solve_decay_rate(target: float, step: str = "cubic", max_iter: int = 400) -> float:
    """``beta >= 0`` with ``int_0^1 exp(-beta S(u)) du = target`` (decreasing in beta)."""
    if not 0.0 < target <= 1.0:
        raise BisectionFailed(f"integral target {target} outside (0, 1]")
    if target == 1.0:
        return 0.0
    S = STEPS[step]
    lo, hi = 0.0, 1.0
    while _decay_integral(hi, S) > target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e150:
            raise BisectionFailed(f"no bracket for integral target {target}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _decay_integral(mid, S) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _cumulative(fun, nodes):
    """Running integral of ``fun`` from ``nodes[0]``, 8-point Gauss-Legendre per cell."""
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[:, None] + half[:, None] * _GL_X[None, :]
    cells = half * (fun(pts) @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(cells)])


def build_ode_minimizer(alpha: float, t0: Optional[float] = None, n_grid: int = ODE_GRID,
                        step: str = "cubic") -> RadialMap:
    """Radial self-map of the unit disk with ``sigma1 + sigma2 = alpha`` at every radius.

    ``psi' = alpha/2`` on ``[0, t0]`` and ``(alpha/2) exp(-beta S(u))`` beyond,
    with ``u = (r - t0)/(1 - t0)`` and ``S`` from :data:`STEPS` (default
    ``3u^2 - 2u^3``); ``beta`` is chosen so that ``psi(1) = 1``.  The twist profile then solves
    ``(psi' + psi/r)^2 + (h' psi)^2 = alpha^2`` with ``h = 0`` on ``[0, t0]``.
    Composing with ``1/alpha`` puts the differential into K.
    """
    if not alpha > 2.0:
        raise AlphaTooSmall(f"alpha must be > 2, got {alpha}")
    if t0 is None:
        t0 = 1.0 / alpha
    if not (0.0 < t0 < 2.0 / alpha and t0 < 1.0):
        raise ParameterOutOfRange(f"t0 must lie in (0, 2/alpha) = (0, {2.0 / alpha}), got {t0}")
    if step not in STEPS:
        raise ParameterOutOfRange(f"step must be one of {sorted(STEPS)}, got {step!r}")
    S = STEPS[step]
    half = 0.5 * alpha
    width = 1.0 - t0
    beta = solve_decay_rate((1.0 / half - t0) / width, step)

    def dpsi(r):
        r = np.asarray(r, dtype=float)
        u = np.clip((r - t0) / width, 0.0, 1.0)
        return half * np.exp(-beta * S(u))

    nodes = np.linspace(t0, 1.0, n_grid)
    psi_nodes = half * t0 + _cumulative(dpsi, nodes)
    if abs(psi_nodes[-1] - 1.0) > 1e-10:
        raise BisectionFailed(f"psi(1) = {psi_nodes[-1]!r} misses 1 by more than 1e-10")
    psi_spline = CubicHermiteSpline(nodes, psi_nodes, dpsi(nodes))

    def psi(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= t0, half * r, psi_spline(np.clip(r, t0, 1.0)))

    def dh_outer(r):
        p = psi(r)
        g = dpsi(r) + p / r
        return np.sqrt(np.maximum(alpha**2 - g**2, 0.0)) / p

    def dh(r):
        r = np.asarray(r, dtype=float)
        safe = np.where(r > t0, r, 1.0)
        return np.where(r > t0, dh_outer(safe), 0.0)

    h_spline = CubicHermiteSpline(nodes, _cumulative(dh_outer, nodes), dh(nodes))

    def h(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= t0, 0.0, h_spline(np.clip(r, t0, 1.0)))

    return RadialMap(psi, dpsi, h, dh, outer_radius=1.0, name=f"ode(alpha={alpha:g},{step})",
                     params={"alpha": alpha, "t0": t0, "beta": beta})


def profile_table(m: AnyMap, n: int = 257, r_min: Optional[float] = None,
                  r_max: Optional[float] = None) -> Dict[str, np.ndarray]:
    """Sampled profiles and singular values at ``n`` radii."""
    lo = r_min if r_min is not None else max(m.inner_radius, 1.0 / n)
    hi = r_max if r_max is not None else min(m.outer_radius, 1.0)
    r = np.linspace(lo, hi, n)
    A = frame_field(m, r)
    s1, s2 = mat2.batch_singular_values(A)
    rho, twist = m.polar_image(r, np.zeros_like(r))
    return {"r": r, "image_r": rho, "twist": twist, "sigma1": s1, "sigma2": s2,
            "jacobian": mat2.batch_det(A)}
