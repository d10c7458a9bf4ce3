import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab.errors import PreconditionError
from horolab.growth import (
    ball_volume,
    bounded_asymptote_check,
    cheeger_limit,
    check_purely_exponential,
    estimate_volume_entropy,
    horoball_slab_volume,
    horosphere_ball_volume,
    lower_bound_ratio,
    rank_detection_from_growth,
    sphere_volume,
    volume_curve,
)
from horolab.manifolds import HomogeneousModel, SurfaceModel
from horolab.models import make_constant_diag_profile
from horolab.surfaces import hyperbolic_plane

R = np.array([0.5, 1.0, 2.0, 5.0, 10.0])


def space_form(n, k=1.0):
    return HomogeneousModel(make_constant_diag_profile([-k * k] * (n - 1)), f"H{n}")


def test_h2_volumes(h2_model):
    c = volume_curve(h2_model, r_grid=R)
    assert np.allclose(c.sphere_vol, 2 * np.pi * np.sinh(R), rtol=1e-9)
    assert np.allclose(c.ball_vol, 2 * np.pi * (np.cosh(R) - 1), rtol=1e-9)


def test_h3_volumes():
    c = volume_curve(space_form(3), r_grid=R)
    assert np.allclose(c.sphere_vol, 4 * np.pi * np.sinh(R) ** 2, rtol=1e-9)
    assert np.allclose(c.ball_vol, np.pi * (np.sinh(2 * R) - 2 * R), rtol=1e-9)


def test_quaternionic_sphere_volume(quat_model):
    exact = 2 * np.pi**2 * 0.5 * np.sinh(2 * R) * np.sinh(R) ** 2
    assert np.allclose(volume_curve(quat_model, r_grid=R).sphere_vol, exact, rtol=1e-9)


def test_flat_volumes(flat_model):
    assert sphere_volume(flat_model, r=3.0) == pytest.approx(6 * math.pi, rel=1e-10)
    assert ball_volume(flat_model, r=3.0) == pytest.approx(9 * math.pi, rel=1e-10)


@given(st.floats(0.2, 2.0), st.floats(0.5, 6.0))
def test_curvature_scaling_in_dimension_two(k, r):
    model = space_form(2, k)
    assert sphere_volume(model, r=r) == pytest.approx(2 * math.pi * math.sinh(k * r) / k, rel=1e-8)


@given(st.floats(-3.0, -0.1), st.floats(0.0, 2.0), st.floats(1.0, 8.0))
def test_volume_comparison(k1, gap, r):
    # more negative curvature, larger spheres
    lo = HomogeneousModel(make_constant_diag_profile([k1, k1]), "a")
    hi = HomogeneousModel(make_constant_diag_profile([k1 - gap, k1]), "b")
    assert sphere_volume(hi, r=r) >= sphere_volume(lo, r=r) * (1 - 1e-10)


def test_surface_volume_matches_closed_form():
    model = SurfaceModel(hyperbolic_plane(), (0.0, 1.0))
    c = volume_curve(model, r_grid=[1.0, 3.0], quad=16)
    assert np.allclose(c.sphere_vol, 2 * np.pi * np.sinh([1.0, 3.0]), rtol=1e-7)
    assert np.all(c.quad_err < 1e-6 * c.sphere_vol)
    with pytest.raises(PreconditionError):
        volume_curve(model, r_grid=[1.0], quad=9)


def test_radius_validation(h2_model):
    for grid in ([0.0, 1.0], [2.0, 1.0], [1.0, 30.0]):
        with pytest.raises(PreconditionError):
            volume_curve(h2_model, r_grid=grid)


def test_entropy(h2_model, quat_model, flat_model):
    grid = np.linspace(10, 20, 11)
    e = estimate_volume_entropy(volume_curve(h2_model, r_grid=grid))
    assert e.h_vol == pytest.approx(1.0, abs=1e-3) and not e.subexponential
    q = estimate_volume_entropy(volume_curve(quat_model, r_grid=grid))
    assert q.h_vol == pytest.approx(4.0, abs=1e-6)
    f = estimate_volume_entropy(volume_curve(flat_model, r_grid=grid))
    assert f.subexponential and f.h_vol == 0.0
    with pytest.raises(PreconditionError):
        estimate_volume_entropy(volume_curve(h2_model, r_grid=[10.0, 12.0]))


def test_purely_exponential(h2_model, flat_model):
    c = volume_curve(h2_model, r_grid=np.arange(1.0, 21.0))
    rep = check_purely_exponential(c, 1.0)
    assert rep.C == pytest.approx(math.pi, rel=1e-8)
    assert rep.ratio_min == pytest.approx(2 * math.pi * (math.cosh(1.0) - 1) / math.e, rel=1e-8)
    with pytest.raises(PreconditionError):
        check_purely_exponential(volume_curve(flat_model, r_grid=[1.0, 2.0]), 0.0)


def test_lower_bound_identity(h2_model, quat_model):
    for model in (h2_model, quat_model):
        rep = lower_bound_ratio(model)
        assert rep.harmonic and rep.nondecreasing
        assert np.max(rep.relative_gap) < 1e-8
    rep = lower_bound_ratio(h2_model)
    # sinh(r) e^{-r} = 1 / (1 + coth r)
    assert np.allclose(rep.direct, 2 * np.pi * np.sinh(rep.r) * np.exp(-rep.r), rtol=1e-9)


def test_horoball_slab(h2_model):
    assert horosphere_ball_volume(h2_model, 2.0) == pytest.approx(4 * math.sinh(1.0))
    vol = horoball_slab_volume(h2_model, rho=2.0, r=3.0)
    assert vol == pytest.approx(4 * math.sinh(1.0) * (math.exp(3.0) - math.exp(-1.0)), rel=1e-9)
    assert horoball_slab_volume(h2_model, rho=2.0, r=-2.0) == 0.0
    # flat horospheres in H^3 are planes: a disc of radius 2 sinh(rho/2)
    assert horosphere_ball_volume(space_form(3), 2.0) == pytest.approx(math.pi * (2 * math.sinh(1.0)) ** 2)
    with pytest.raises(PreconditionError):
        horosphere_ball_volume(HomogeneousModel(make_constant_diag_profile([-4.0]), "k2"), 1.0)


def test_cheeger(h2_model, flat_model):
    rep = cheeger_limit(h2_model, r_max=15.0)
    assert rep.limit == pytest.approx(1.0, abs=1e-5) and rep.above
    assert np.allclose(rep.g, 1 / np.tanh(rep.r / 2), rtol=1e-9)
    f = cheeger_limit(flat_model, r_max=15.0, h=0.0)
    assert np.allclose(f.g, 2 / f.r, rtol=1e-9)


def test_bounded_asymptote(h2_model, quat_model):
    rep = bounded_asymptote_check(h2_model, T=10.0, r_list=[1.0, 5.0, 10.0])
    assert rep.A_emp == pytest.approx(1.0, abs=1e-9)
    assert rep.U_min == pytest.approx(1.0, abs=1e-9)
    assert rep.verdict
    assert bounded_asymptote_check(quat_model, T=10.0, r_list=[1.0, 5.0, 10.0]).verdict


def test_rank_detection(h2_model, quat_model, flat_model):
    assert rank_detection_from_growth(h2_model).rank_one
    rep = rank_detection_from_growth(quat_model)
    assert rep.min_det[-1] == pytest.approx(16.0, rel=1e-6)
    f = rank_detection_from_growth(flat_model)
    assert not f.rank_one
    assert np.allclose(f.min_det, 1 / f.r, rtol=1e-6)
