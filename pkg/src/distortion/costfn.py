"""Singular-value cost functions and the reduced minimization problem.

A cost ``f`` on ``(0, inf)`` with ``f(1) = 0``, decreasing on ``(0, 1]`` and
increasing on ``[1, inf)``, defines the energy density
``f(sigma1) + f(sigma2)`` and the pointwise bound::

    F_f(s) = min { f(x) + f(y) : x, y > 0, x y = s }.

For ``s <= 1`` the minimum is attained with ``s <= x, y <= 1`` (and with
``1 <= x, y <= s`` for ``s >= 1``), so the search runs over ``u = log x``
between ``0`` and ``log s``.  Whether the conformal pair ``(sqrt s, sqrt s)``
is optimal is governed by midpoint convexity of ``g(u) = f(exp(u))`` at
``log(s) / 2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import (
    InvalidCostFunction,
    NonpositiveArgument,
    NonpositiveRatio,
    ParameterOutOfRange,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class CostKind(enum.Enum):
    QUADRATIC = "quadratic"
    LOG_SQUARE = "logsq"
    CUBIC_ABS = "cubic"
    QUARTIC = "quartic"
    POWER = "power"
    CUSTOM = "custom"


def _vectorize(func):
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(func(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.vectorize(func, otypes=[float])(x)

    return wrapped


@dataclass(frozen=True)
class CostFunction:
    kind: CostKind
    func: Callable = field(repr=False, compare=False)
    p: Optional[float] = None
    name: str = ""
    relaxed: bool = False
    notes: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "func", _vectorize(self.func))
        if not self.name:
            object.__setattr__(self, "name", self.kind.value)
        problems = _validate(self.func)
        if problems and not self.relaxed:
            raise InvalidCostFunction(f"{self.name}: " + "; ".join(problems))
        object.__setattr__(self, "notes", tuple(problems))

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def value_at_zero(self) -> float:
        """Estimate of ``f(0+)``; ``inf`` if ``f`` still grows between 1e-150 and 1e-300."""
        with np.errstate(all="ignore"):
            a = float(self.func(np.array(1e-150)))
            b = float(self.func(np.array(1e-300)))
        if not math.isfinite(b) or b > a * (1.0 + 1e-6) + 1e-9:
            return math.inf
        return b


def _validate(func) -> List[str]:
    problems = []
    lo = np.logspace(-3, 0, 200)
    hi = np.logspace(0, 3, 200)
    with np.errstate(all="ignore"):
        if abs(float(func(np.array(1.0)))) > 1e-12:
            problems.append("f(1) != 0")
        ylo, yhi = func(lo), func(hi)
    if not np.all(np.diff(ylo) < 0):
        problems.append("not strictly decreasing on (0, 1]")
    if not np.all(np.diff(yhi) > 0):
        problems.append("not strictly increasing on [1, inf)")
    return problems


def quadratic() -> CostFunction:
    return CostFunction(CostKind.QUADRATIC, lambda x: (x - 1.0) ** 2)


def log_square() -> CostFunction:
    return CostFunction(CostKind.LOG_SQUARE, lambda x: np.log(x) ** 2)


def cubic_abs() -> CostFunction:
    return CostFunction(CostKind.CUBIC_ABS, lambda x: np.abs(x - 1.0) ** 3)


def quartic() -> CostFunction:
    return CostFunction(CostKind.QUARTIC, lambda x: (x - 1.0) ** 4)


def power(p: float) -> CostFunction:
    if p < 1:
        raise ParameterOutOfRange(f"power cost needs p >= 1, got {p}")
    return CostFunction(CostKind.POWER, lambda x: np.abs(x - 1.0) ** p, p=p, name=f"power{p:g}")


def custom(func: Callable, name: str = "custom", relaxed: bool = False) -> CostFunction:
    """Wrap a user callable.  ``relaxed=True`` keeps functions that fail the
    monotonicity spot-check (e.g. Ogden-type sums) and records why in ``notes``."""
    return CostFunction(CostKind.CUSTOM, func, name=name, relaxed=relaxed)


def ogden(coeffs, exponents) -> CostFunction:
    """``sum_k a_k (x**alpha_k - 1)``, admitted with relaxed validation."""
    a = np.asarray(coeffs, dtype=float)
    al = np.asarray(exponents, dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.sum(a[:, None] * (x.reshape(1, -1) ** al[:, None] - 1.0), axis=0).reshape(x.shape)

    return CostFunction(CostKind.CUSTOM, f, name="ogden", relaxed=True)


BUILTINS = {
    "quadratic": quadratic,
    "logsq": log_square,
    "cubic": cubic_abs,
    "quartic": quartic,
}


def by_name(name: str) -> CostFunction:
    if name.startswith("power"):
        return power(float(name[5:] or 2))
    try:
        return BUILTINS[name]()
    except KeyError:
        raise InvalidCostFunction(f"unknown cost {name!r}; choose from {sorted(BUILTINS)} or powerP")


def evaluate(f: CostFunction, x):
    if np.any(np.asarray(x) <= 0):
        raise NonpositiveArgument(f"cost functions are defined on (0, inf), got {x}")
    y = f.func(x)
    return float(y) if np.ndim(x) == 0 else y


# ---------------------------------------------------------------------------
# reduced problem
# ---------------------------------------------------------------------------

def golden_section(fun: Callable[[float], float], a: float, b: float, tol: float = 1e-11):
    """Minimize a unimodal ``fun`` on ``[a, b]``; returns ``(x, fun(x))``."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


@dataclass(frozen=True)
class FMinResult:
    s: float
    value: float
    x: float
    y: float
    conformal: bool
    candidates: Tuple[Tuple[float, float, float], ...] = ()

    @property
    def argmin(self) -> Tuple[float, float]:
        return (self.x, self.y)


def F_f(f: CostFunction, s: float, n_seeds: int = 512, tol: float = 1e-12) -> FMinResult:
    """Value and minimizing pair of ``min f(x) + f(y)`` subject to ``x y = s``.

    ``n_seeds`` log-spaced seeds in ``[min(s,1), max(s,1)]`` locate every
    basin; each local minimum is then refined by golden-section search in
    ``log x``.  When the conformal pair is within ``tol`` of the best
    candidate it is reported as the minimizer (``conformal=True``), and all
    near-optimal candidates are listed.
    """
    if not s > 0:
        raise NonpositiveRatio(f"s must be > 0, got {s}")
    s = float(s)
    root = math.sqrt(s)
    conf_val = 2.0 * float(f.func(np.array(root)))
    if s == 1.0:
        return FMinResult(s, conf_val, 1.0, 1.0, True, ((conf_val, 1.0, 1.0),))

    L = math.log(s)

    def phi(u):
        x = np.exp(u)
        return f.func(x) + f.func(s / x)

    u = np.linspace(min(L, 0.0), max(L, 0.0), n_seeds)
    vals = phi(u)
    cands = [(conf_val, root, root)]
    for i in range(n_seeds):
        left = vals[i - 1] if i > 0 else math.inf
        right = vals[i + 1] if i < n_seeds - 1 else math.inf
        if not (vals[i] <= left and vals[i] <= right):
            continue
        lo, hi = u[max(i - 1, 0)], u[min(i + 1, n_seeds - 1)]
        ub, vb = golden_section(lambda t: float(phi(t)), lo, hi)
        if vals[i] < vb:
            ub, vb = u[i], vals[i]
        x = math.exp(ub)
        cands.append((float(vb), x, s / x))

    best = min(c[0] for c in cands)
    near = _dedupe([c for c in cands if c[0] <= best + tol])
    if conf_val <= best + tol:
        return FMinResult(s, min(best, conf_val), root, root, True, tuple(near))
    v, x, y = min(cands)
    return FMinResult(s, v, x, y, False, tuple(near))


def _dedupe(cands):
    out = []
    for c in sorted(cands, key=lambda c: c[1]):
        if not any(abs(c[1] - o[1]) <= 1e-7 * max(1.0, o[1]) or abs(c[1] - o[2]) <= 1e-7 * max(1.0, o[2])
                   for o in out):
            out.append(c)
    return out


def conformal_is_minimizer(f: CostFunction, s: float, tol: float = 1e-10) -> bool:
    if not s > 0:
        raise NonpositiveRatio(f"s must be > 0, got {s}")
    if s > 1:
        raise ParameterOutOfRange(f"s must lie in (0, 1], got {s}")
    res = F_f(f, s)
    return res.value >= 2.0 * float(f.func(np.array(math.sqrt(s)))) - tol


def phase_threshold(f: CostFunction, tol: float = 1e-10, s_min: float = 1e-6,
                    n_scan: int = 121, rtol: float = 1e-6) -> Optional[float]:
    """Largest ratio below which the conformal pair stops being optimal.

    Scans ``n_scan`` log-spaced ratios from 1 down to ``s_min``, then bisects
    (in ``log s``) between the last conformal ratio and the first
    non-conformal one.  Returns ``None`` if no flip is found.
    """
    grid = np.logspace(0.0, math.log10(s_min), n_scan)
    prev = grid[0]
    for s in grid[1:]:
        if not conformal_is_minimizer(f, float(s), tol):
            lo, hi = math.log(s), math.log(prev)
            while hi - lo > rtol:
                mid = 0.5 * (lo + hi)
                if conformal_is_minimizer(f, math.exp(mid), tol):
                    hi = mid
                else:
                    lo = mid
            return math.exp(0.5 * (lo + hi))
        prev = s
    return None


@dataclass(frozen=True)
class ConvexityReport:
    x: np.ndarray = field(repr=False)
    min_second_difference: float
    violations: Tuple[float, ...]

    @property
    def convex(self) -> bool:
        return not self.violations

    @property
    def strictly_convex(self) -> bool:
        return self.convex and self.min_second_difference > 0


def g_convexity_scan(f: CostFunction, x_lo: float, n: int = 201, tol: float = 1e-12) -> ConvexityReport:
    """Sample ``g(x) = f(exp(x))`` on ``n`` points of ``[x_lo, 0]``.

    Reports the smallest scaled second difference (an estimate of ``g''``)
    and the centers of every sampled midpoint-convexity violation
    ``g(x_i) > (g(x_{i-k}) + g(x_{i+k})) / 2``.
    """
    if not x_lo < 0:
        raise ParameterOutOfRange(f"x_lo must be < 0, got {x_lo}")
    if n < 3:
        raise ParameterOutOfRange(f"need n >= 3 samples, got {n}")
    x = np.linspace(x_lo, 0.0, n)
    g = f.func(np.exp(x))
    h = x[1] - x[0]
    d2 = (g[:-2] - 2.0 * g[1:-1] + g[2:]) / h**2
    bad = np.zeros(n, dtype=bool)
    for k in range(1, (n - 1) // 2 + 1):
        centre = g[k:n - k]
        mean = 0.5 * (g[: n - 2 * k] + g[2 * k:])
        bad[k:n - k] |= centre > mean + tol * (1.0 + np.abs(mean))
    return ConvexityReport(x, float(d2.min()), tuple(float(v) for v in x[bad]))
