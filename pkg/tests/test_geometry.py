from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinlayer import geometry as geo
from thinlayer.errors import DegenerateChart, FoldedLayer, OutsideDomain
from thinlayer.monge import HeightField, monge_chart
from thinlayer.surfaces import (builtin_charts, catenary, cylinder, paraboloid, plane,
                                sample_points, sphere, torus)

CHARTS = builtin_charts()
CHART_IDS = [c.name for c in CHARTS]


# ------------------------------------------------------------ examples


def test_plane_frame():
    fr = geo.evaluate_frame(plane(), (0.3, -1.2))
    np.testing.assert_array_equal(fr.e1, [1, 0, 0])
    np.testing.assert_array_equal(fr.e2, [0, 1, 0])
    np.testing.assert_array_equal(fr.n, [0, 0, 1])


def test_sphere_equator_normal_is_radial():
    fr = geo.evaluate_frame(sphere(1.0), (math.pi / 2, 0.0))
    assert abs(abs(fr.n[0]) - 1.0) < 1e-15
    assert np.allclose(fr.n[1:], 0.0, atol=1e-15)


def test_monge_normal_formula():
    field = HeightField.from_expression("sin(x)*cos(y) + x*y/3", domain=((-2, 2), (-2, 2)))
    x, y = 0.4, -0.7
    hx, hy = field.Hx(x, y), field.Hy(x, y)
    want = np.array([-hx, -hy, 1.0]) / math.sqrt(1 + hx * hx + hy * hy)
    np.testing.assert_allclose(geo.evaluate_frame(monge_chart(field), (x, y)).n, want, rtol=0, atol=1e-15)


def test_plane_forms():
    f = geo.fundamental_forms(plane(), (0.2, 0.1))
    np.testing.assert_array_equal(f.h, np.eye(2))
    np.testing.assert_array_equal(f.k, np.zeros((2, 2)))
    assert geo.principal_curvatures(f) == (0.0, 0.0)


def test_cylinder_principal_curvatures():
    rep = geo.curvature_report(cylinder(2.0), (0.8, 0.3))
    assert sorted(abs(k) for k in (rep.k1, rep.k2)) == pytest.approx([0.0, 0.5], abs=1e-15)
    # outward normal: k_ab = -n . r_ab gives +1/R around the circle
    assert rep.k1 == pytest.approx(0.5, rel=1e-14)


def test_unit_sphere_is_umbilic():
    rep = geo.curvature_report(sphere(1.0), (1.1, 2.0))
    assert rep.k1 == pytest.approx(rep.k2, rel=1e-13)
    assert abs(rep.k1) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("R", [0.3, 1.0, 4.0])
def test_sphere_potential_vanishes(R):
    for p in sample_points(sphere(R), 5):
        assert abs(geo.curvature_report(sphere(R), p).vs_coeff) <= 1e-12 / R**2


def test_catenary_potential_at_waist():
    assert geo.curvature_report(catenary(1.0), (0.0, 0.0)).vs_coeff == pytest.approx(-0.125, rel=1e-14)


def test_catenary_potential_profile():
    a = 1.7
    for x in np.linspace(-2.5 * a, 2.5 * a, 11):
        got = geo.curvature_report(catenary(a), (float(x), 0.3)).vs_coeff
        assert got == pytest.approx(-1.0 / (8 * a * a * math.cosh(x / a) ** 4), rel=1e-12)


def test_paraboloid_potential():
    assert geo.curvature_report(paraboloid(1.0), (1.0, 0.4)).vs_coeff == pytest.approx(-1.0 / 64, rel=1e-14)
    a, rho = 0.8, 1.3
    want = -rho**4 / (8 * (a * a + rho * rho) ** 3)
    assert geo.curvature_report(paraboloid(a), (rho, 2.0)).vs_coeff == pytest.approx(want, rel=1e-13)


# -------------------------------------------------------- metric factor


def test_metric_det_on_surface():
    rep = geo.curvature_report(torus(2.0, 0.7), (0.4, 1.0))
    assert geo.ambient_metric_det(rep, rep.forms.h_det, 0.0) == rep.forms.h_det


def test_metric_det_plane():
    rep = geo.curvature_report(plane(), (0.1, 0.1))
    for u3 in (-0.5, 0.0, 0.3, 7.0):
        assert geo.ambient_metric_det(rep, rep.forms.h_det, u3) == rep.forms.h_det


def test_metric_det_sphere_equator():
    rep = geo.curvature_report(sphere(1.0), (math.pi / 2, 0.3))
    h = rep.forms.h_det
    got = geo.ambient_metric_det(rep, h, 0.1)
    # outward normal, K = 2, KG = 1
    assert got == pytest.approx(h * (1 + 0.1 * 2 + 0.01) ** 2, rel=1e-14)
    assert geo.ambient_metric_det_direct(rep.forms, 0.1) == pytest.approx(got, rel=1e-13)


def test_folded_layer():
    rep = geo.curvature_report(sphere(1.0), (1.0, 1.0))
    with pytest.raises(FoldedLayer):
        geo.ambient_metric_det(rep, rep.forms.h_det, -1.0)
    # past the focal point omega is positive again but the layer has folded
    with pytest.raises(FoldedLayer):
        geo.ambient_metric_det(rep, rep.forms.h_det, -1.5)
    cyl = geo.curvature_report(cylinder(2.0), (0.0, 0.0))
    with pytest.raises(FoldedLayer):
        geo.ambient_metric_det(cyl, cyl.forms.h_det, -2.5)
    assert geo.ambient_metric_det(cyl, cyl.forms.h_det, 2.5) > 0


@pytest.mark.parametrize("chart", CHARTS, ids=CHART_IDS)
def test_metric_factorisation(chart):
    rng = np.random.default_rng(3)
    for p in sample_points(chart, 4):
        rep = geo.curvature_report(chart, p)
        for u3 in rng.uniform(-0.1, 0.1, 5):
            fact = geo.ambient_metric_det(rep, rep.forms.h_det, u3)
            direct = geo.ambient_metric_det_direct(rep.forms, u3)
            assert abs(fact - direct) <= 1e-8 * abs(direct)


def test_ambient_metric_is_symmetric():
    f = geo.fundamental_forms(torus(2.0, 0.7), (0.9, 0.2))
    g = geo.ambient_metric(f, 0.05)
    assert abs(g[0, 1] - g[1, 0]) <= 1e-15 * np.abs(g).max()


# ----------------------------------------------------------- Weingarten


def test_weingarten_plane():
    assert geo.weingarten_residual(plane(), (0.3, 0.3)) == 0.0


def test_weingarten_sphere_fd():
    chart = sphere(1.0).finite_difference()
    assert geo.weingarten_residual(chart, (math.pi / 3, 1.0), method="fd") <= 1e-6


def test_weingarten_catenary_fd():
    chart = catenary(1.0).finite_difference()
    assert geo.weingarten_residual(chart, (0.7, 0.0), method="fd") <= 1e-6


@pytest.mark.parametrize("chart", CHARTS, ids=CHART_IDS)
def test_weingarten_analytic(chart):
    for p in sample_points(chart, 10):
        assert geo.weingarten_residual(chart, p) <= 1e-10


def test_weingarten_catches_sign_error():
    chart = torus(2.0, 0.7)
    p = (0.5, 0.5)
    f = geo.fundamental_forms(chart, p)
    bad = replace(f, k=-f.k, k_mixed=-f.k_mixed)
    assert geo.weingarten_residual(chart, p, forms=bad) > 0.5


# ------------------------------------------------------------ singular


def test_polar_axis_is_degenerate():
    with pytest.raises(DegenerateChart):
        geo.evaluate_frame(paraboloid(1.0), (0.0, 1.0))


def test_sphere_pole_is_degenerate():
    with pytest.raises(DegenerateChart):
        geo.fundamental_forms(sphere(1.0), (0.0, 0.5))


def test_outside_domain():
    with pytest.raises(OutsideDomain):
        geo.curvature_report(plane(), (3.0, 0.0))


# ---------------------------------------------------- fd fallback route


@pytest.mark.parametrize("chart", CHARTS, ids=CHART_IDS)
def test_fd_fallback_agrees(chart):
    fd = chart.finite_difference()
    for p in sample_points(chart, 4):
        a = geo.curvature_report(chart, p)
        b = geo.curvature_report(fd, p)
        scale = max(abs(a.k1), abs(a.k2), 1.0)
        assert abs(a.k1 - b.k1) <= 1e-6 * scale
        assert abs(a.k2 - b.k2) <= 1e-6 * scale


# ----------------------------------------------------------- invariants

point_fracs = st.tuples(st.floats(0.02, 0.98), st.floats(0.02, 0.98))
chart_index = st.integers(0, len(CHARTS) - 1)


def _at(chart, frac):
    (a0, a1), (b0, b1) = chart.domain
    return (a0 + frac[0] * (a1 - a0), b0 + frac[1] * (b1 - b0))


@given(chart_index, point_fracs)
def test_forms_symmetric_and_consistent(i, frac):
    chart = CHARTS[i]
    rep = geo.curvature_report(chart, _at(chart, frac))
    f = rep.forms
    assert f.h[0, 1] == f.h[1, 0]
    assert f.k[0, 1] == f.k[1, 0]
    scale = max(abs(rep.k1), abs(rep.k2)) or 1.0
    assert abs(rep.k1 + rep.k2 - np.trace(f.k_mixed)) <= 1e-10 * scale
    assert abs(rep.k1 * rep.k2 - np.linalg.det(f.k_mixed)) <= 1e-10 * scale**2
    assert rep.k1 >= rep.k2


@given(chart_index, point_fracs)
def test_potential_non_positive(i, frac):
    chart = CHARTS[i]
    assert geo.curvature_report(chart, _at(chart, frac)).vs_coeff <= 0.0


@given(chart_index, point_fracs)
def test_swapping_chart_flips_normal(i, frac):
    chart = CHARTS[i]
    u, v = _at(chart, frac)
    a = geo.curvature_report(chart, (u, v))
    b = geo.curvature_report(chart.swapped(), (v, u))
    scale = max(abs(a.k1), abs(a.k2)) or 1.0
    assert abs(a.K + b.K) <= 1e-12 * scale
    assert abs(a.KG - b.KG) <= 1e-12 * scale**2
    assert abs(a.vs_coeff - b.vs_coeff) <= 1e-12 * scale**2
    assert sorted(map(abs, (a.k1, a.k2))) == pytest.approx(sorted(map(abs, (b.k1, b.k2))), abs=1e-12 * scale)


def _rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@given(chart_index, point_fracs, st.integers(0, 2**32 - 1))
def test_rigid_motion_invariance(i, frac, seed):
    rng = np.random.default_rng(seed)
    chart = CHARTS[i]
    moved = chart.transformed(_rotation(rng), rng.uniform(-5, 5, 3))
    p = _at(chart, frac)
    a, b = geo.curvature_report(chart, p), geo.curvature_report(moved, p)
    scale = max(abs(a.k1), abs(a.k2)) or 1.0
    for name in ("k1", "k2", "K"):
        assert abs(getattr(a, name) - getattr(b, name)) <= 1e-8 * scale
    assert abs(a.KG - b.KG) <= 1e-8 * scale**2
    assert abs(a.vs_coeff - b.vs_coeff) <= 1e-8 * scale**2


def test_umbilic_iff_zero_potential():
    for chart in (sphere(2.0), plane()):
        for p in sample_points(chart, 4):
            rep = geo.curvature_report(chart, p)
            assert abs(rep.k1 - rep.k2) <= 1e-12
            assert abs(rep.vs_coeff) <= 1e-24 + 1e-12 * rep.k1**2
    rep = geo.curvature_report(cylinder(1.0), (0.3, 0.1))
    assert rep.vs_coeff < 0 and rep.k1 != rep.k2
