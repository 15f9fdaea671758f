"""Seeded random-matrix checks of the pointwise inequalities.

Matrices have i.i.d. entries uniform in ``[-3, 3]``; a determinant floor is
imposed by rejection.  Samples are drawn up front from a single generator,
so results do not depend on how many worker threads evaluate them
(``DISTORTION_THREADS``); chunk results are combined in chunk order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import mat2
from .bounds import F, batch_sandwich_CO, batch_sandwich_K

DEFAULT_SEED = 20240917
ENTRY_RANGE = 3.0
SLACK = 1e-12
ORACLE_TOL = 1e-4
ORACLE_POINTS = 1024


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("DISTORTION_THREADS", "1")))
    except ValueError:
        return 1


def random_matrices(rng: np.random.Generator, n: int, det_min: float = 0.0,
                    entry_range: float = ENTRY_RANGE) -> np.ndarray:
    """``n`` matrices with ``det >= det_min`` by rejection, shape ``(n, 2, 2)``."""
    out: List[np.ndarray] = []
    have = 0
    while have < n:
        batch = rng.uniform(-entry_range, entry_range, size=(max(2 * (n - have), 64), 2, 2))
        keep = batch[mat2.batch_det(batch) >= det_min]
        out.append(keep)
        have += len(keep)
    return np.concatenate(out)[:n]


def random_K_matrices(rng: np.random.Generator, n: int) -> np.ndarray:
    """``R(a) diag(t, 1 - t) R(b)`` with ``t`` uniform in ``[0, 1/2]``."""
    t = rng.uniform(0.0, 0.5, n)
    a, b = rng.uniform(-math.pi, math.pi, (2, n))
    D = np.zeros((n, 2, 2))
    D[:, 0, 0], D[:, 1, 1] = t, 1.0 - t
    return _rot(a) @ D @ _rot(b)


def _rot(t):
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


@dataclass
class SuiteReport:
    suite: str
    n_samples: int
    seed: int
    violations: int
    worst_margin: float
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, indent=2, sort_keys=True)


def _chunked(fn: Callable[[np.ndarray], np.ndarray], A: np.ndarray) -> np.ndarray:
    """Apply ``fn`` (returning one margin per matrix) over chunks, preserving order."""
    k = thread_count()
    if k == 1 or len(A) < 4096:
        return fn(A)
    parts = np.array_split(A, k)
    with ThreadPoolExecutor(k) as pool:
        return np.concatenate(list(pool.map(fn, parts)))


def _tol(*terms) -> np.ndarray:
    return SLACK * (1.0 + sum(np.abs(t) for t in terms))


def _margins_sandwich_k(A):
    lo, mid, up = batch_sandwich_K(A)
    return np.minimum(mid - lo + _tol(lo, mid), up - mid + _tol(up, mid))


def _margins_sandwich_co(A):
    lo, mid, up = batch_sandwich_CO(A)
    return np.minimum(mid - lo + _tol(lo, mid), up - mid + _tol(up, mid))


def _margins_pointwise(A):
    dso2 = mat2.batch_dist_SO2_sq(A)
    bound = F(mat2.batch_det(A))
    return dso2 - bound + _tol(dso2, bound)


def _margins_polar(A):
    O = mat2.batch_polar_factor(A)
    I = np.eye(2)
    orth = np.abs(np.swapaxes(O, -1, -2) @ O - I).max(axis=(-1, -2))
    unit_det = np.abs(mat2.batch_det(O) - 1.0)
    P = np.swapaxes(O, -1, -2) @ A
    sym = np.abs(P[..., 0, 1] - P[..., 1, 0])
    s1, s2 = mat2.batch_singular_values(A)
    # A + Cof A = (sigma1 + sigma2) O(A), hence |A + Cof A - O| = sqrt(2) |sigma1 + sigma2 - 1|
    cof_gap = np.linalg.norm(A + mat2.batch_cofactor(A) - O, axis=(-1, -2))
    cof_err = np.abs(cof_gap - math.sqrt(2.0) * np.abs(s1 + s2 - 1.0))
    dist_err = np.abs(np.sum((A - O) ** 2, axis=(-1, -2)) - mat2.batch_dist_SO2_sq(A))
    scale = 1.0 + np.sum(A**2, axis=(-1, -2))
    worst = np.maximum.reduce([orth, unit_det, sym / scale, cof_err / scale, dist_err / scale])
    return 1e-12 - worst


def dist_K_oracle(A: np.ndarray, n_points: int = ORACLE_POINTS) -> np.ndarray:
    """``min_k dist(A, K_{s_k})`` over ``s_k = (1 - t_k^2) / 4`` with ``t_k`` uniform in ``[0, 1]``.

    The ``K_s`` singular pairs ``(1 -+ t) / 2`` are evenly spaced along the
    segment that K traces in the singular-value plane.
    """
    t = np.linspace(0.0, 1.0, n_points)
    s = 0.25 * (1.0 - t * t)
    best = np.full(len(A), np.inf)
    for chunk in np.array_split(np.arange(n_points), max(1, n_points // 1024)):
        d2 = mat2.batch_dist_Ks_sq(A[:, None], s[chunk][None, :])
        best = np.minimum(best, d2.min(axis=1))
    return np.sqrt(best)


def _oracle_runner(n_points, tol):
    def fn(A):
        closed = np.sqrt(mat2.batch_dist_K_sq(A))
        return tol - np.abs(closed - dist_K_oracle(A, n_points))
    return fn


SUITES = {
    "sandwich_k": (0.0, _margins_sandwich_k),
    "sandwich_co": (0.25, _margins_sandwich_co),
    "pointwise_bound": (0.0, _margins_pointwise),
    "polar_identity": (1e-6, _margins_polar),
    "dist_k_oracle": (0.0, None),
}


def run_suite(suite: str, n_samples: int = 10_000, seed: int = DEFAULT_SEED,
              oracle_points: int = ORACLE_POINTS, oracle_tol: float = ORACLE_TOL) -> SuiteReport:
    """Run one named property over ``n_samples`` seeded random matrices.

    ``worst_margin`` is the smallest slack over all samples; a negative value
    is a violation.  ``polar_identity`` additionally mixes in matrices drawn
    exactly from K (a quarter of the sample).
    """
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    det_min, fn = SUITES[suite]
    rng = np.random.default_rng(seed)
    A = random_matrices(rng, n_samples, det_min)
    details: Dict[str, float] = {}
    if suite == "polar_identity":
        k = n_samples // 4
        A = np.concatenate([A[: n_samples - k], random_K_matrices(rng, k)])
    if suite == "dist_k_oracle":
        fn = _oracle_runner(oracle_points, oracle_tol)
        details = {"oracle_points": oracle_points, "tolerance": oracle_tol}
    margins = _chunked(fn, A)
    if suite == "dist_k_oracle":
        details["max_abs_difference"] = float(oracle_tol - margins.min())
    return SuiteReport(suite, n_samples, seed, int(np.sum(margins < 0)), float(margins.min()), details)
