"""Acceptance criteria, each checked at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line.  Run ``pytest -v
tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import math
import sys

import numpy as np
import pytest

from distortion import bounds, cli, costfn, energy, maps, mat2, shapes, verify
from distortion import criticality as cr
from distortion.domains import Disk

HS = [1 / 32, 1 / 64, 1 / 128]


def criterion_1():
    rep = verify.run_suite("pointwise_bound", 100_000)
    worst = 0.0
    for lam in np.linspace(0.5, 2.0, 40):  # conformal equality needs det >= 1/4
        A = mat2.Mat2.rotation(0.3 * lam) * lam
        worst = max(worst, abs(mat2.dist_SO2(A) ** 2 - bounds.F(A.det)))
    for s in np.linspace(0.0, 0.25, 40):
        p = mat2.Ks_pair(s)
        A = mat2.Mat2.rotation(1.0) @ mat2.Mat2.diag(p.sigma1, p.sigma2) @ mat2.Mat2.rotation(-0.4)
        worst = max(worst, abs(mat2.dist_SO2(A) ** 2 - bounds.F(A.det)))
    ok = rep.violations == 0 and worst <= 1e-12
    return ok, f"violations={rep.violations}/1e5, equality-case error={worst:.2e}"


def criterion_2():
    k = verify.run_suite("sandwich_k", 100_000)
    co = verify.run_suite("sandwich_co", 100_000)
    return k.violations == 0 and co.violations == 0, f"K violations={k.violations}, CO violations={co.violations}"


def criterion_3():
    coarse = verify.run_suite("dist_k_oracle", 1000, oracle_points=1024, oracle_tol=1e-4)
    fine = verify.run_suite("dist_k_oracle", 100, oracle_points=100_000, oracle_tol=1e-8)
    d1 = coarse.details["max_abs_difference"]
    d2 = fine.details["max_abs_difference"]
    return coarse.passed and fine.passed, f"1024 pts: {d1:.2e} <= 1e-4; 1e5 pts: {d2:.2e} <= 1e-8"


def criterion_4():
    grid = energy.build_grid(Disk(), 64, 64)
    twist = maps.build_twist_minimizer(1.0 / 3.0)
    hom = maps.homothety(1.0 / 3.0)
    t2 = energy.energy_p(twist, grid, 2).energy
    t4 = energy.energy_p(twist, grid, 4).energy
    h2 = energy.energy_p(hom, grid, 2).energy
    h4 = energy.energy_p(hom, grid, 4).energy
    ok = (abs(t2 - 7 / 9) <= 1e-9 and abs(t4 - 49 / 81) <= 1e-9 and abs(h2 - 8 / 9) <= 1e-9
          and abs(h4 - 4 * (2 / 3) ** 4) <= 1e-9 and h2 > t2 and abs((h2 - t2) - 1 / 9) <= 1e-12)
    return ok, f"E2 twist={t2!r}, E4 twist={t4!r}, E2 hom={h2!r}, E4 hom={h4!r}, gap={h2 - t2!r}"


def criterion_5():
    m = maps.build_ode_minimizer(3.0)
    tab = maps.profile_table(m, n=4096)
    sup = float(np.max(np.abs(tab["sigma1"] + tab["sigma2"] - 3.0)))
    grid = energy.build_grid(Disk(), 1024, 16)
    vr = energy.energy_p(m, grid, 2).volume_ratio
    e2 = energy.energy_p(m.scaled(1.0 / 3.0), grid, 2).energy
    ok = sup <= 1e-6 and abs(vr - 1.0) <= 1e-6 and abs(e2 - 7 / 9) <= 1e-6
    return ok, f"sup|s1+s2-3|={sup:.1e}, volume ratio-1={vr - 1:.1e}, E2-7/9={e2 - 7 / 9:.1e}"


def criterion_6():
    lams = cli.parse_values("0.05:0.95:19")
    rows = cli.phase_rows(lams, 2.0, 64)
    winners = [(r["lambda"], r["winner"]) for r in rows]
    switch_ok = all(w == ("twist" if lam < 0.5 else "tie" if lam == 0.5 else "homothety") for lam, w in winners)
    half = next(r for r in rows if r["lambda"] == 0.5)
    tie_ok = abs(half["homothety_energy"] - 0.5) <= 1e-9 and abs(half["twist_energy"] - 0.5) <= 1e-9
    return switch_ok and tie_ok, (f"{len(rows)} scale factors, switch at 0.5; at 0.5 hom="
                                  f"{half['homothety_energy']!r} twist={half['twist_energy']!r}")


def criterion_7():
    q, lg = costfn.quadratic(), costfn.log_square()
    d_q = max(abs(costfn.F_f(q, s).value - bounds.F(s)) for s in np.linspace(0.005, 3.0, 200))
    d_l = max(abs(costfn.F_f(lg, s).value - 0.5 * math.log(s) ** 2) for s in np.linspace(0.005, 1.0, 200))
    tq = costfn.phase_threshold(q)
    tl = costfn.phase_threshold(lg)
    ok = d_q <= 1e-8 and d_l <= 1e-8 and tq is not None and abs(tq - 0.25) <= 0.01 and tl is None
    return ok, f"|F_f-F|={d_q:.1e}, |F_f-log^2/2|={d_l:.1e}, threshold quad={tq}, logsq={tl}"


def criterion_8():
    parts, ok = [], True
    twist = cr.default_study_map("twist")
    for p in (2, 4):
        slope = cr.study_slope(cr.refinement_study(twist, HS, lambda g, p=p: cr.el_divergence(g, p)))
        ok &= slope >= 1.9
        parts.append(f"twist EL p={p} slope={slope:.3f}")
    for kind in ("quintic", "mixed"):
        slope = cr.study_slope(cr.refinement_study(cr.default_study_map(kind), HS, cr.piola_divergence))
        ok &= slope >= 1.9
        parts.append(f"{kind} Piola slope={slope:.3f}")
    rows = cr.refinement_study(cr.default_study_map("ode"), HS, lambda g: cr.el_divergence(g, 4))
    floor = min(r.residual for r in rows)
    ok &= floor > 1e-3
    parts.append(f"ode EL p=4 residuals {', '.join(f'{r.residual:.3g}' for r in rows)}")
    return bool(ok), "; ".join(parts)


def criterion_9():
    rec = energy.rigidity_residuals(maps.homothety(0.4), energy.build_grid(Disk(), 64, 64))
    got = tuple(rec.first)
    ok = all(abs(a - b) <= 1e-10 for a, b in zip(got, (0.02, 0.04, 0.04))) and rec.ordered()
    return ok, f"sandwich={tuple(round(v, 14) for v in got)}"


def criterion_10():
    parts, ok = [], True
    for c in (1.0, 5.0, 14.0):
        lam = maps.twist_lambda(c)
        line = shapes.boundary(maps.TwistMap(c, lam), Disk(), 256)
        rel = shapes.polygon_area(line.image_x, line.image_y) / (lam * lam * math.pi)
        ok &= abs(rel - 1.0) <= 0.01
        parts.append(f"c={c:g}: area/(lambda^2 pi)={rel:.5f}")
    return bool(ok), "; ".join(parts)


CRITERIA = [
    (1, "pointwise bound and equality cases", criterion_1),
    (2, "K and CO sandwich orderings", criterion_2),
    (3, "dist_K closed form vs s-grid oracle", criterion_3),
    (4, "twist vs homothety energies at lambda=1/3", criterion_4),
    (5, "ODE minimizer alpha=3", criterion_5),
    (6, "phase scan switches at lambda=1/2", criterion_6),
    (7, "general cost functions", criterion_7),
    (8, "criticality refinement studies", criterion_8),
    (9, "rigidity sandwich for homothety 0.4", criterion_9),
    (10, "shape export areas", criterion_10),
]


def _line(num, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {title} ({detail})"


@pytest.mark.parametrize("num, title, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, title, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(_line(num, title, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
