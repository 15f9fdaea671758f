"""Discrete divergence residuals of matrix fields on Cartesian lattices.

A map is critical for the p-distortion energy when the stress field
``P = dist(d phi, SO2)**(p-2) * (d phi - O(d phi))`` is divergence free
(row-wise).  The cofactor field ``Cof d phi`` of any C^2 map is divergence
free.  Both divergences are approximated by central differences, so smooth
exactly-critical maps give residuals of order ``h**2`` when the field is
sampled analytically.

Note that central differences commute: a field that is itself produced by
central differences has a numerically zero cofactor divergence whatever the
map, so refinement studies must use analytic fields.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import mat2
from .errors import (
    DistortionError,
    EvaluationMargin,
    GridTooSmall,
    ParameterOutOfRange,
    PowerBelowTwo,
    SingularNode,
)
from .maps import RadialMap, TwistMap, cartesian_differential, evaluate_cartesian

SINGULAR_SIGMA = 1e-8


class Mode(enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "fd"


@dataclass(frozen=True)
class CartesianMap:
    """A planar map given by ``func(x, y) -> (X, Y)`` and optionally its Jacobian."""

    func: Callable = field(repr=False)
    jacobian: Optional[Callable] = field(default=None, repr=False)
    name: str = "cartesian"


def affine_map(A, b=(0.0, 0.0)) -> CartesianMap:
    A = np.asarray(A, dtype=float)

    def func(x, y):
        return A[0, 0] * x + A[0, 1] * y + b[0], A[1, 0] * x + A[1, 1] * y + b[1]

    def jac(x, y):
        return np.broadcast_to(A, np.shape(x) + (2, 2)).copy()

    return CartesianMap(func, jac, "affine")


def _poly(fx, fy, jac, name):
    return CartesianMap(lambda x, y: (fx(x, y), fy(x, y)), jac, name)


def _jac(a, b, c, d):
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


def cubic_test_map() -> CartesianMap:
    """``(x^2 y, x + y^3)``; its cofactor has entries of degree <= 2, so the
    central-difference divergence vanishes identically."""
    return _poly(lambda x, y: x * x * y, lambda x, y: x + y**3,
                 lambda x, y: _jac(2 * x * y, x * x, np.ones_like(x), 3 * y * y), "cubic")


def quintic_test_map() -> CartesianMap:
    """``(x + x^3 y^2 / 5, y + x^2 y^3 / 5)``."""
    return _poly(
        lambda x, y: x + 0.2 * x**3 * y**2,
        lambda x, y: y + 0.2 * x**2 * y**3,
        lambda x, y: _jac(1 + 0.6 * x**2 * y**2, 0.4 * x**3 * y, 0.4 * x * y**3, 1 + 0.6 * x**2 * y**2),
        "quintic",
    )


def mixed_test_map() -> CartesianMap:
    """``(x + x^4 y / 10, y + 3 x y^4 / 10)``."""
    return _poly(
        lambda x, y: x + 0.1 * x**4 * y,
        lambda x, y: y + 0.3 * x * y**4,
        lambda x, y: _jac(1 + 0.4 * x**3 * y, 0.1 * x**4, 0.3 * y**4, 1 + 1.2 * x * y**3),
        "mixed",
    )


@dataclass(frozen=True)
class FieldGrid:
    """Lattice ``-L + k h`` in each direction, masked to ``r_in <= |x| <= r_out``."""

    h: float
    half_width: float
    r_in: float
    r_out: float
    coords: np.ndarray = field(repr=False)
    field: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def X(self) -> np.ndarray:
        return np.meshgrid(self.coords, self.coords, indexing="ij")[0]

    @property
    def Y(self) -> np.ndarray:
        return np.meshgrid(self.coords, self.coords, indexing="ij")[1]

    @property
    def active(self) -> np.ndarray:
        r = np.hypot(self.X, self.Y)
        return (r >= self.r_in) & (r <= self.r_out)

    @property
    def interior(self) -> np.ndarray:
        a = self.active
        out = np.zeros_like(a)
        out[1:-1, 1:-1] = a[1:-1, 1:-1] & a[2:, 1:-1] & a[:-2, 1:-1] & a[1:-1, 2:] & a[1:-1, :-2]
        return out


def field_grid(h: float, half_width: float = 1.0, r_in: float = 0.1,
               r_out: float = math.inf) -> FieldGrid:
    if not h > 0:
        raise ParameterOutOfRange(f"spacing must be > 0, got {h}")
    n = int(round(2.0 * half_width / h))
    if abs(n * h - 2.0 * half_width) > 1e-9 * half_width:
        raise ParameterOutOfRange(f"spacing {h} does not divide the box width {2 * half_width}")
    coords = -half_width + h * np.arange(n + 1)
    grid = FieldGrid(h, half_width, r_in, r_out, coords)
    if not grid.interior.any():
        raise GridTooSmall("the lattice has no interior nodes")
    return grid


def _analytic(m, x, y):
    if isinstance(m, CartesianMap):
        if m.jacobian is None:
            raise ParameterOutOfRange(f"{m.name} has no analytic Jacobian")
        return m.jacobian(x, y)
    return cartesian_differential(m, x, y)


def _evaluate(m, x, y):
    if isinstance(m, CartesianMap):
        return m.func(x, y)
    try:
        return evaluate_cartesian(m, x, y)
    except DistortionError as exc:
        raise EvaluationMargin(f"cannot evaluate {m.name} one step around every node: {exc}") from exc


def _central(m, x, y, h):
    xp, yp = _evaluate(m, x + h, y)
    xm, ym = _evaluate(m, x - h, y)
    xq, yq = _evaluate(m, x, y + h)
    xn, yn = _evaluate(m, x, y - h)
    k = 0.5 / h
    return _jac(k * (xp - xm), k * (xq - xn), k * (yp - ym), k * (yq - yn))


def differential_field(m, grid: FieldGrid, mode=Mode.ANALYTIC) -> FieldGrid:
    """Cartesian ``d phi`` at every active node (NaN elsewhere)."""
    mode = Mode(mode)
    act = grid.active
    x, y = grid.X[act], grid.Y[act]
    if mode is Mode.ANALYTIC:
        vals = _analytic(m, x, y)
    else:
        vals = _central(m, x, y, grid.h)
    out = np.full(act.shape + (2, 2), np.nan)
    out[act] = vals
    return replace(grid, field=out)


def _divergence(P: np.ndarray, grid: FieldGrid) -> np.ndarray:
    """Row-wise divergence ``d_x P[:, 0] + d_y P[:, 1]`` at interior nodes (NaN elsewhere)."""
    inner = grid.interior
    if not inner.any():
        raise GridTooSmall("no interior nodes")
    k = 0.5 / grid.h
    div = np.full(P.shape[:2] + (2,), np.nan)
    core = k * (P[2:, 1:-1, :, 0] - P[:-2, 1:-1, :, 0]) + k * (P[1:-1, 2:, :, 1] - P[1:-1, :-2, :, 1])
    div[1:-1, 1:-1] = core
    div[~inner] = np.nan
    return div


@dataclass(frozen=True)
class ResidualNorms:
    sup: float
    l2: float


def norms(div: np.ndarray, grid: FieldGrid, coarse: Optional[FieldGrid] = None) -> ResidualNorms:
    """Sup and discrete L2 norms of a divergence field over interior nodes.

    With ``coarse`` (a lattice on the same box whose spacing is a multiple of
    ``grid.h``) only nodes shared with the interior of ``coarse`` count, so
    residuals at different spacings are compared on one fixed point set.
    """
    mask = grid.interior
    step = grid.h
    if coarse is not None:
        k = int(round(coarse.h / grid.h))
        if coarse.half_width != grid.half_width or abs(k * grid.h - coarse.h) > 1e-12 * coarse.h:
            raise ParameterOutOfRange("coarse lattice must be nested in the fine one")
        div = div[::k, ::k]
        mask = mask[::k, ::k] & coarse.interior
        step = coarse.h
    if not mask.any():
        raise GridTooSmall("no interior nodes to measure")
    mag = np.linalg.norm(div[mask], axis=-1)
    return ResidualNorms(float(np.max(mag)), math.sqrt(math.fsum(mag**2) * step**2))


def _require_field(grid: FieldGrid) -> np.ndarray:
    if grid.field is None:
        raise ParameterOutOfRange("grid carries no matrix field; call differential_field first")
    return grid.field


def piola_divergence(grid: FieldGrid) -> np.ndarray:
    return _divergence(mat2.batch_cofactor(_require_field(grid)), grid)


def piola_residual(grid: FieldGrid, coarse: Optional[FieldGrid] = None) -> float:
    """Sup over interior nodes of the discrete divergence of ``Cof d phi``."""
    return norms(piola_divergence(grid), grid, coarse).sup


def stress_field(grid: FieldGrid, p: float) -> np.ndarray:
    """``dist_SO2^(p-2) (A - O(A))`` at active nodes."""
    if p < 2:
        raise PowerBelowTwo(f"p must be >= 2, got {p}")
    A = _require_field(grid)
    act = grid.active
    vals = A[act]
    det = mat2.batch_det(vals)
    s1, _ = mat2.batch_singular_values(vals)
    bad = (det <= 0) | (s1 < SINGULAR_SIGMA)
    if np.any(bad):
        raise SingularNode(f"{int(bad.sum())} node(s) with det <= 0 or sigma1 < {SINGULAR_SIGMA}")
    dist = np.sqrt(mat2.batch_dist_SO2_sq(vals))
    P = np.full(A.shape, np.nan)
    P[act] = (dist ** (p - 2.0))[:, None, None] * (vals - mat2.batch_polar_factor(vals))
    return P


def el_divergence(grid: FieldGrid, p: float) -> np.ndarray:
    return _divergence(stress_field(grid, p), grid)


def el_residual(grid: FieldGrid, p: float, coarse: Optional[FieldGrid] = None) -> float:
    """Sup over interior nodes of the discrete divergence of the p-stress field."""
    return norms(el_divergence(grid, p), grid, coarse).sup


# ---------------------------------------------------------------------------
# refinement studies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RefinementRow:
    h: float
    residual: float
    slope: Optional[float]


def fitted_slope(hs: Sequence[float], residuals: Sequence[float]) -> float:
    """Least-squares slope of ``log residual`` against ``log h``."""
    return float(np.polyfit(np.log(hs), np.log(residuals), 1)[0])


def refinement_study(m, hs: Sequence[float], divergence: Callable[[FieldGrid], np.ndarray],
                     r_in: float = 0.1, mode=Mode.ANALYTIC) -> List[RefinementRow]:
    """Sup residuals of ``divergence(field)`` for each spacing in ``hs``.

    Spacings must be nested (each divides the largest).  All residuals are
    measured on the interior nodes of the coarsest lattice; otherwise the
    innermost nodes creep toward the excluded disk as ``h`` shrinks and the
    sup picks up the growth of the error constant there.
    """
    hs = sorted(hs, reverse=True)
    coarse = study_grid(m, hs[0], r_in)
    rows: List[RefinementRow] = []
    for h in hs:
        g = differential_field(m, study_grid(m, h, r_in), mode)
        res = norms(divergence(g), g, coarse).sup
        slope = None
        if rows and rows[-1].residual > 0 and res > 0:
            slope = math.log(rows[-1].residual / res) / math.log(rows[-1].h / h)
        rows.append(RefinementRow(h, res, slope))
    return rows


def study_slope(rows: Sequence[RefinementRow]) -> float:
    return fitted_slope([r.h for r in rows], [r.residual for r in rows])


def refinement_csv(rows: Sequence[RefinementRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["h", "residual", "slope"])
    for row in rows:
        w.writerow([f"{row.h:.9g}", f"{row.residual:.9g}", "" if row.slope is None else f"{row.slope:.9g}"])
    return buf.getvalue()


def default_study_map(kind: str):
    """Maps used by the command-line refinement studies."""
    from .maps import build_ode_minimizer, build_twist_minimizer, homothety

    kind = kind.lower()
    if kind == "twist":
        return build_twist_minimizer(1.0 / 3.0)
    if kind == "ode":
        return build_ode_minimizer(3.0).scaled(1.0 / 3.0)
    if kind == "homothety":
        return homothety(0.5)
    if kind == "quintic":
        return quintic_test_map()
    if kind == "mixed":
        return mixed_test_map()
    if kind == "cubic":
        return cubic_test_map()
    raise ParameterOutOfRange(f"unknown map kind {kind!r}")


def study_grid(m, h: float, r_in: float = 0.1) -> FieldGrid:
    """Grid on ``[-1, 1]^2``, clipped to the unit disk for maps defined only there."""
    r_out = getattr(m, "outer_radius", math.inf)
    if isinstance(m, (RadialMap, TwistMap)):
        r_in = max(r_in, m.inner_radius)
    return field_grid(h, 1.0, r_in, r_out)
