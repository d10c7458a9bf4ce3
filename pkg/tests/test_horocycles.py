import math

import numpy as np
import pytest

from horolab.errors import PreconditionError
from horolab.horocycles import (
    BusemannField,
    build_stable_curve,
    comparison_rho,
    horocycle_arc_within,
    second_fundamental_lipschitz,
    stable_curve_contraction,
    verify_hopf_formula,
)
from horolab.surfaces import flat_plane, hyperbolic_plane, pinched_surface

H2 = hyperbolic_plane()
PINCHED = pinched_surface()
UP = ((0.0, 1.0), math.pi / 2)
V_PINCHED = ((0.5, 1.0), math.pi / 2)


@pytest.fixture(scope="module")
def h2_curve():
    return build_stable_curve(H2, UP, 0.5, n_samples=9)


@pytest.fixture(scope="module")
def pinched_curve():
    return build_stable_curve(PINCHED, V_PINCHED, 0.03, n_samples=5)


def test_h2_stable_curve_is_horizontal_line(h2_curve):
    # the horocycle of an upward geodesic through (0, 1) is y = 1
    ys = np.array([p[1] for p in h2_curve.points])
    xs = np.array([p[0] for p in h2_curve.points])
    assert np.max(np.abs(ys - 1.0)) < 1e-9
    assert np.allclose(np.abs(xs), np.linspace(0, 0.5, 9), atol=1e-9)
    assert np.allclose(h2_curve.angles, math.pi / 2, atol=1e-8)
    assert np.allclose(h2_curve.unit_norms(), 1.0, atol=1e-12)
    assert np.max(np.abs(h2_curve.busemann)) < 1e-9


def test_busemann_field_gradient_matches_fd():
    field = BusemannField(PINCHED, V_PINCHED)
    q = (0.7, 1.2)
    angle, norm = field.gradient_fd(q)
    assert norm == pytest.approx(1.0, abs=1e-4)
    assert angle == pytest.approx(field(q)[1], abs=1e-4)


def test_busemann_field_needs_negative_curvature():
    with pytest.raises(PreconditionError):
        BusemannField(flat_plane(), ((0.0, 0.0), 0.0))


def test_hopf_control_on_h2(h2_curve):
    rep = verify_hopf_formula(H2, h2_curve.subcurve(2))
    assert abs(rep.lhs) < 1e-8 and abs(rep.rhs) < 1e-8


def test_hopf_formula_on_pinched(pinched_curve):
    rep = verify_hopf_formula(PINCHED, pinched_curve, rule="trapezoid")
    assert rep.lhs > 0
    assert rep.relative < 1e-4
    # second order: halving the mesh divides the residual by about four
    coarse, fine = rep.refinement[-2]["residual"], rep.refinement[-1]["residual"]
    assert 3.0 < coarse / fine < 5.0


def test_hopf_rejects_bad_options(pinched_curve):
    with pytest.raises(PreconditionError):
        verify_hopf_formula(PINCHED, pinched_curve, rule="simpson")
    with pytest.raises(PreconditionError):
        verify_hopf_formula(PINCHED, pinched_curve, r=0.5)
    with pytest.raises(PreconditionError):
        verify_hopf_formula(PINCHED, pinched_curve, s_quad=3)


def test_lipschitz_on_h2_is_zero(h2_curve):
    rep = second_fundamental_lipschitz(H2, h2_curve)
    assert np.max(rep.differences) < 1e-12 and rep.bounded


def test_lipschitz_on_pinched(pinched_curve):
    rep = second_fundamental_lipschitz(PINCHED, pinched_curve, levels=2)
    assert rep.bounded
    assert np.all(rep.ratios > 0) and rep.variation < 0.05
    with pytest.raises(PreconditionError):
        second_fundamental_lipschitz(PINCHED, pinched_curve, levels=3)


def test_contraction_on_h2():
    curve = build_stable_curve(H2, UP, 0.1, n_samples=3)
    rep = stable_curve_contraction(H2, curve, t_list=(0.5, 1.0, 2.0))
    # a horocycle arc pushed by t shrinks by e^{-t}
    assert np.allclose(rep.ratio, np.exp(-rep.t), rtol=2e-3)
    assert rep.holds


def test_comparison_rho():
    assert comparison_rho(H2) == pytest.approx(2.0)
    with pytest.raises(PreconditionError):
        comparison_rho(flat_plane())


@pytest.mark.slow
def test_horocycle_arc_in_ball_h2():
    assert horocycle_arc_within(H2, UP, 2.0, step=0.1) == pytest.approx(4 * math.sinh(1.0), rel=1e-3)
