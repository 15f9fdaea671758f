"""Midpoint quadrature of distortion energies over disks, annuli and squares.

All averages are ``sum(w * integrand) / sum(w)`` accumulated with
``math.fsum`` in node order, so reports are bit-reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np

from . import mat2
from .bounds import THRESHOLD, F, F_pow, Sandwich
from .costfn import CostFunction, F_f, g_convexity_scan
from .domains import Annulus, Disk, Square
from .errors import (
    DistortionError,
    MapEvaluationFailure,
    NonpositiveSingularValue,
    PowerBelowTwo,
    ResolutionTooLow,
    UnsupportedDomain,
    VolumeInconsistent,
)
from .maps import AnyMap, frame_field


@dataclass(frozen=True)
class QuadratureGrid:
    domain: object
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    resolution: tuple

    @property
    def area(self) -> float:
        return math.fsum(self.weights)

    @property
    def size(self) -> int:
        return self.weights.size


def build_grid(domain, n_r: int, n_theta: int) -> QuadratureGrid:
    """Tensor midpoint rule; polar weights ``r dr dtheta``, Cartesian ``dx dy`` for squares."""
    if n_r < 2 or n_theta < 2:
        raise ResolutionTooLow(f"need at least 2 nodes per direction, got ({n_r}, {n_theta})")
    if isinstance(domain, Square):
        a = domain.half_width
        dx, dy = 2.0 * a / n_r, 2.0 * a / n_theta
        X, Y = np.meshgrid(-a + dx * (np.arange(n_r) + 0.5), -a + dy * (np.arange(n_theta) + 0.5),
                           indexing="ij")
        x, y = X.ravel(), Y.ravel()
        return QuadratureGrid(domain, x, y, np.hypot(x, y), np.full(x.size, dx * dy), (n_r, n_theta))
    if isinstance(domain, Disk):
        r0, r1 = 0.0, domain.radius
    elif isinstance(domain, Annulus):
        r0, r1 = domain.inner, domain.outer
    else:
        raise UnsupportedDomain(f"unknown domain {domain!r}")
    dr, dt = (r1 - r0) / n_r, 2.0 * math.pi / n_theta
    R, T = np.meshgrid(r0 + dr * (np.arange(n_r) + 0.5), dt * (np.arange(n_theta) + 0.5), indexing="ij")
    r = R.ravel()
    return QuadratureGrid(domain, r * np.cos(T.ravel()), r * np.sin(T.ravel()), r, r * dr * dt,
                          (n_r, n_theta))


def _mean(w, values, area) -> float:
    return math.fsum(w * values) / area


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    descriptor: str
    volume_ratio: float
    bound: float
    gap: float
    K_defect: float
    CO_defect: float
    map_name: str = ""
    domain_area: float = 0.0
    omitted_area: float = 0.0
    n_nodes: int = 0
    hypotheses: Dict[str, bool] = field(default_factory=dict)

    @property
    def k_sandwich(self) -> Sandwich:
        """``(K_defect, gap, 2 K_defect)``; ordered when ``p = 2`` and the ratio is at most 1/4."""
        return Sandwich(self.K_defect, self.gap, 2.0 * self.K_defect)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def csv_header() -> str:
        return ",".join(_CSV_FIELDS)

    def to_csv_row(self) -> str:
        return reports_to_csv([self]).splitlines()[1]


_CSV_FIELDS = ("map_name", "descriptor", "energy", "volume_ratio", "bound", "gap", "K_defect", "CO_defect")


@dataclass(frozen=True)
class _Pointwise:
    A: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    det: np.ndarray


def _pointwise(m: AnyMap, grid: QuadratureGrid) -> _Pointwise:
    try:
        A = frame_field(m, grid.r)
    except DistortionError as exc:
        raise MapEvaluationFailure(f"{getattr(m, 'name', m)} not evaluable on grid: {exc}") from exc
    if not np.all(np.isfinite(A)):
        raise MapEvaluationFailure("non-finite differential at some node")
    s1, s2 = mat2.batch_singular_values(A)
    return _Pointwise(A, s1, s2, mat2.batch_det(A))


def _omitted(grid: QuadratureGrid) -> float:
    d = grid.domain
    if isinstance(d, Annulus):
        return math.pi * d.inner**2
    return 0.0


def _base(m, grid, pw, energy, descriptor, bound, hypotheses=None) -> EnergyReport:
    area = grid.area
    w = grid.weights
    vr = _mean(w, pw.det, area)
    return EnergyReport(
        energy=energy,
        descriptor=descriptor,
        volume_ratio=vr,
        bound=bound(max(vr, 0.0)),
        gap=energy - bound(max(vr, 0.0)),
        K_defect=_mean(w, mat2.dist_K_sq_sigma(pw.s1, pw.s2), area),
        CO_defect=_mean(w, 0.5 * (pw.s2 - pw.s1) ** 2, area),
        map_name=getattr(m, "name", ""),
        domain_area=area,
        omitted_area=_omitted(grid),
        n_nodes=grid.size,
        hypotheses=hypotheses or {},
    )


def energy_p(m: AnyMap, grid: QuadratureGrid, p: float = 2.0) -> EnergyReport:
    """Average of ``dist(d phi, SO2)**p`` with the bound ``F(ratio)**(p/2)``."""
    if p < 2:
        raise PowerBelowTwo(f"p must be >= 2, got {p}")
    pw = _pointwise(m, grid)
    if np.any(pw.det <= 0):
        raise MapEvaluationFailure("differential not orientation preserving at some node")
    dso2 = (pw.s1 - 1.0) ** 2 + (pw.s2 - 1.0) ** 2
    e = _mean(grid.weights, dso2 ** (0.5 * p), grid.area)
    return _base(m, grid, pw, e, f"p={p:g}", lambda s: F_pow(s, p))


def energy_f(m: AnyMap, grid: QuadratureGrid, f: CostFunction) -> EnergyReport:
    """Average of ``f(sigma1) + f(sigma2)`` with the bound ``F_f(ratio)``.

    ``hypotheses`` records whether the conformal pair minimizes at the
    computed ratio and whether ``f(exp(.))`` is convex over the range of log
    singular values met on the grid; the bound is guaranteed only then.
    """
    pw = _pointwise(m, grid)
    if np.any(pw.s1 <= 0):
        if math.isinf(f.value_at_zero):
            raise NonpositiveSingularValue(f"sigma1 = 0 at some node and {f.name} diverges at 0")
    with np.errstate(divide="ignore"):
        dens = f.func(pw.s1) + f.func(pw.s2)
    e = _mean(grid.weights, dens, grid.area)
    vr = _mean(grid.weights, pw.det, grid.area)
    fmin = F_f(f, vr) if vr > 0 else None
    lo = float(np.log(np.min(pw.s1))) if np.min(pw.s1) > 0 else -50.0
    hyp = {
        "conformal_at_ratio": bool(fmin is not None and fmin.conformal),
        "g_convex_on_sampled_range": bool(lo >= 0 or g_convexity_scan(f, min(lo, -1e-9)).convex),
    }
    bound = (lambda s: fmin.value) if fmin is not None else (lambda s: 2.0 * f.value_at_zero)
    return _base(m, grid, pw, e, f"f={f.name}", bound, hyp)


@dataclass(frozen=True)
class RigidityRecord:
    volume_ratio: float
    first: Sandwich
    second: Optional[Sandwich]
    deficit: float
    first_applies: bool
    second_applies: bool

    def ordered(self, tol: float = 1e-8) -> bool:
        """Ordering of every sandwich whose ratio is at most 1/4."""
        ok = self.first.ordered(tol) or not self.first_applies
        if self.second is not None and self.second_applies:
            ok = ok and self.second.ordered(tol)
        return ok


def rigidity_residuals(m: AnyMap, grid: QuadratureGrid, V_N: Optional[float] = None,
                       tol: float = 1e-8) -> RigidityRecord:
    """Quadratic-energy rigidity sandwiches.

    ``first = (Kd, E2 - F(ratio), 2 Kd)`` with ``Kd`` the mean squared distance
    to K.  When the target area ``V_N`` is given, ``second`` uses ``F(V_N / V_M)``
    in the middle and adds ``2 (V_N - V_image) / V_M`` to both outer members.
    The orderings are guaranteed only for ratios at most 1/4, flagged by
    ``first_applies`` / ``second_applies``.
    """
    rep = energy_p(m, grid, 2.0)
    area = rep.domain_area
    kd = rep.K_defect
    first = Sandwich(kd, rep.energy - F(max(rep.volume_ratio, 0.0)), 2.0 * kd)
    second = None
    deficit = 0.0
    second_applies = False
    if V_N is not None:
        image = rep.volume_ratio * area
        if V_N < image - tol * area:
            raise VolumeInconsistent(f"V_N = {V_N} is smaller than the image area {image}")
        deficit = 2.0 * (V_N - image) / area
        second = Sandwich(kd + deficit, rep.energy - F(V_N / area), 2.0 * kd + deficit)
        second_applies = V_N / area <= THRESHOLD
    return RigidityRecord(rep.volume_ratio, first, second, deficit,
                          rep.volume_ratio <= THRESHOLD, second_applies)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_FIELDS)
    for rep in reports:
        d = rep.to_dict()
        w.writerow([f"{d[k]:.9g}" if isinstance(d[k], float) else d[k] for k in _CSV_FIELDS])
    return buf.getvalue()
