import math

import numpy as np
import pytest

from distortion import criticality as cr
from distortion import maps, mat2
from distortion.errors import EvaluationMargin, GridTooSmall, ParameterOutOfRange, SingularNode

HS = [1 / 32, 1 / 64, 1 / 128]
A = np.array([[1.2, -0.3], [0.4, 0.9]])


def test_affine_field_exact_in_fd_mode():
    g = cr.field_grid(1 / 16)
    f = cr.differential_field(cr.affine_map(A, (0.5, -1.0)), g, cr.Mode.FINITE_DIFFERENCE)
    assert np.max(np.abs(f.field[g.active] - A)) < 1e-13
    assert cr.piola_residual(f) < 1e-12
    assert cr.el_residual(f, 3) < 1e-12


def test_homothety_field_and_el_residual():
    g = cr.differential_field(maps.homothety(0.6), cr.field_grid(1 / 16))
    assert np.max(np.abs(g.field[g.active] - 0.6 * np.eye(2))) < 1e-15
    for p in (2, 3, 4):
        assert cr.el_residual(g, p) <= 1e-12


def _fd_vs_analytic(m, h, coarse):
    g = cr.study_grid(m, h)
    a = cr.differential_field(m, g, cr.Mode.ANALYTIC).field
    b = cr.differential_field(m, g, cr.Mode.FINITE_DIFFERENCE).field
    k = int(round(coarse.h / h))
    mask = coarse.interior
    return float(np.max(np.abs(a[::k, ::k][mask] - b[::k, ::k][mask])))


def test_twist_fd_agrees_with_analytic_at_second_order():
    m = maps.build_twist_minimizer(1.0 / 3.0)
    hs = [1 / 16, 1 / 32, 1 / 64]
    coarse = cr.study_grid(m, hs[0])
    errs = [_fd_vs_analytic(m, h, coarse) for h in hs]
    assert cr.fitted_slope(hs, errs) == pytest.approx(2.0, abs=0.1)


def test_cubic_test_map_piola_residual_vanishes():
    for mode in cr.Mode:
        g = cr.differential_field(cr.cubic_test_map(), cr.field_grid(1 / 32), mode)
        assert cr.piola_residual(g) < 1e-12


@pytest.mark.parametrize("kind", ["quintic", "mixed", "twist"])
def test_piola_refinement_slope(kind):
    rows = cr.refinement_study(cr.default_study_map(kind), HS, cr.piola_divergence)
    assert rows[0].residual > rows[1].residual > rows[2].residual > 0
    assert cr.study_slope(rows) >= 1.9


@pytest.mark.parametrize("p", [2, 4])
def test_twist_el_refinement_slope(p):
    rows = cr.refinement_study(cr.default_study_map("twist"), HS, lambda g: cr.el_divergence(g, p))
    assert cr.study_slope(rows) >= 1.9


def test_ode_map_p4_plateau():
    rows = cr.refinement_study(cr.default_study_map("ode"), HS, lambda g: cr.el_divergence(g, 4))
    assert min(r.residual for r in rows) > 1e-3
    assert rows[-1].residual > 0.5 * rows[0].residual


def test_septic_ode_map_is_critical_for_p2():
    m = maps.build_ode_minimizer(3.0, step="septic").scaled(1.0 / 3.0)
    rows = cr.refinement_study(m, HS, lambda g: cr.el_divergence(g, 2))
    assert cr.study_slope(rows) >= 1.9
    rows4 = cr.refinement_study(m, HS, lambda g: cr.el_divergence(g, 4))
    assert rows4[-1].residual > 1e-3


def test_K_field_stress_equals_minus_cofactor():
    g = cr.differential_field(maps.build_twist_minimizer(0.3), cr.field_grid(1 / 16))
    act = g.active
    P = cr.stress_field(g, 2)
    assert np.max(np.abs(P[act] + mat2.batch_cofactor(g.field[act]))) < 1e-13
    el = cr.el_divergence(g, 2)
    pi = cr.piola_divergence(g)
    inner = g.interior
    assert np.max(np.abs(el[inner] + pi[inner])) < 1e-12


def test_norms_on_coarse_nodes():
    m = cr.quintic_test_map()
    fine = cr.differential_field(m, cr.field_grid(1 / 64))
    coarse = cr.field_grid(1 / 16)
    div = cr.piola_divergence(fine)
    n = cr.norms(div, fine, coarse)
    assert n.sup <= cr.norms(div, fine).sup
    assert n.l2 >= 0
    with pytest.raises(ParameterOutOfRange):
        cr.norms(div, fine, cr.field_grid(0.1 * 2 / 3))


def test_errors():
    with pytest.raises(GridTooSmall):
        cr.field_grid(1.0, r_in=0.5)
    with pytest.raises(ParameterOutOfRange):
        cr.field_grid(0.3)
    ode = maps.build_ode_minimizer(3.0)
    with pytest.raises(EvaluationMargin):
        cr.differential_field(ode, cr.study_grid(ode, 1 / 16), cr.Mode.FINITE_DIFFERENCE)
    folded = cr.affine_map([[1.0, 0.0], [0.0, -1.0]])
    g = cr.differential_field(folded, cr.field_grid(1 / 8))
    with pytest.raises(SingularNode):
        cr.el_residual(g, 2)
    with pytest.raises(ParameterOutOfRange):
        cr.piola_residual(cr.field_grid(1 / 8))
    with pytest.raises(ParameterOutOfRange):
        cr.default_study_map("spiral")


def test_refinement_csv():
    rows = cr.refinement_study(cr.quintic_test_map(), [1 / 8, 1 / 16], cr.piola_divergence)
    lines = cr.refinement_csv(rows).splitlines()
    assert lines[0] == "h,residual,slope"
    assert lines[1].endswith(",") and len(lines) == 3
    assert float(lines[2].split(",")[2]) == pytest.approx(rows[1].slope)
    assert rows[1].slope == pytest.approx(math.log(rows[0].residual / rows[1].residual) / math.log(2))
