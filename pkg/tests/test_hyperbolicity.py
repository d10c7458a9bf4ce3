import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab.errors import PreconditionError
from horolab.hyperbolicity import (
    anosov_exponent,
    divergence_bounds,
    fit_growth,
    sample_triangles,
    thin_triangle_delta,
)
from horolab.models import make_constant_diag_profile, make_sinusoidal_profile, shift_profile
from horolab.surfaces import flat_plane, hyperbolic_plane, pinched_surface

H2 = hyperbolic_plane()
GROMOV_H2 = math.log(1 + math.sqrt(2))


def test_fit_growth_models():
    t = np.linspace(1, 20, 40)
    f = fit_growth(t, 2.0 * t + 0.5)
    assert f.model == "exponential" and f.alpha == pytest.approx(2.0)
    assert f.c == pytest.approx(math.exp(0.5))
    p = fit_growth(t, np.log(t))
    assert p.model == "polynomial" and p.alpha == 0.0 and p.c == pytest.approx(1.0)


def test_anosov_closed_forms(h2, flat, quat):
    r = anosov_exponent(h2)
    assert r.alpha == pytest.approx(1.0, abs=5e-3) and r.anosov
    # c is the best constant in sinh t >= c e^{alpha t} on the fit grid
    t = np.linspace(1.0, r.T_fit, 96)
    assert r.c == pytest.approx(np.min(np.sinh(t) * np.exp(-r.alpha * t)), rel=1e-7)
    f = anosov_exponent(flat)
    assert f.alpha == 0.0 and not f.anosov
    assert anosov_exponent(quat).alpha == pytest.approx(1.0, abs=5e-3)
    with pytest.raises(PreconditionError):
        anosov_exponent(h2, T_fit=3.0)


def test_mixed_flat_direction_is_not_anosov():
    assert not anosov_exponent(make_constant_diag_profile([-1.0, 0.0])).anosov


@given(st.floats(0.7, 3.0))
def test_anosov_rate_constant_curvature(k):
    assert anosov_exponent(make_constant_diag_profile([-k * k])).alpha == pytest.approx(k, abs=0.01)


@given(st.floats(0.7, 2.5), st.floats(0.1, 1.0))
def test_anosov_rate_monotone_in_curvature(k, dk):
    lo = anosov_exponent(make_constant_diag_profile([-k * k])).alpha
    hi = anosov_exponent(make_constant_diag_profile([-(k + dk) ** 2])).alpha
    assert hi > lo


@given(st.floats(0.0, 2 * math.pi))
def test_anosov_rate_shift_invariant(t0):
    base = make_sinusoidal_profile(-2.0, -1.0)
    a0 = anosov_exponent(base).alpha
    assert anosov_exponent(shift_profile(base, t0)).alpha == pytest.approx(a0, abs=0.03)
    assert 1.0 <= a0 <= math.sqrt(3.0)


def test_divergence_bracket(h2_model, quat_model, flat_model):
    d = divergence_bounds(h2_model, v1=[1.0, 0.0], v2=[0.0, 1.0])
    assert d.bracket_ok and d.rates_ordered and d.exponential
    assert np.allclose(d.upper, d.angle * np.sinh(d.t), rtol=1e-8)
    q = divergence_bounds(quat_model, v1=[1, 0, 0, 0], v2=[0, 1, 0, 0], eigen_index=0)
    assert q.alpha_up == pytest.approx(2.0, abs=0.02) and q.alpha_low == pytest.approx(1.0, abs=0.02)
    f = divergence_bounds(flat_model, v1=[1.0, 0.0], v2=[0.0, 1.0])
    assert f.bracket_ok and not f.exponential
    with pytest.raises(PreconditionError):
        divergence_bounds(h2_model, v1=[1.0, 0.0], v2=[1.0, 1e-9])
    with pytest.raises(PreconditionError):
        divergence_bounds(h2_model, v1=[1.0, 0.0], v2=[-1.0, 0.0])


def test_sample_triangles_stay_in_ball():
    from horolab.surfaces import surface_distance

    tris = sample_triangles(H2, (0.0, 1.0), n=3, radius=2.0, seed=4)
    assert len(tris) == 3
    for tri in tris:
        for q in tri:
            assert surface_distance(H2, (0.0, 1.0), q) <= 2.0 + 1e-6
    assert tris == sample_triangles(H2, (0.0, 1.0), n=3, radius=2.0, seed=4)


def _euclidean_delta(tri, probes):
    pts = [np.array(p, dtype=float) for p in tri]

    def seg_dist(q, a, b):
        u = np.clip(np.dot(q - a, b - a) / np.dot(b - a, b - a), 0.0, 1.0)
        return np.linalg.norm(q - (a + u * (b - a)))

    best = 0.0
    for i in range(3):
        a, b = pts[i], pts[(i + 1) % 3]
        c = pts[(i + 2) % 3]
        for u in np.linspace(0, 1, probes + 2)[1:-1]:
            q = a + u * (b - a)
            best = max(best, min(seg_dist(q, b, c), seg_dist(q, c, a)))
    return best


def test_tiny_triangle_is_nearly_euclidean():
    tri = ((0.0, 1.0), (0.01, 1.0), (0.0, 1.01))
    rep = thin_triangle_delta(H2, [tri], probes=4)
    # the half-plane metric is |dz| / y; y is 1 up to 1%
    assert rep.delta == pytest.approx(_euclidean_delta(tri, 4), rel=0.02)


@pytest.mark.parametrize("surface", [H2, pinched_surface()], ids=["H2", "pinched"])
def test_thin_triangles_below_h2_constant(surface):
    # curvature <= -1 implies the H^2 bound on the thinness constant
    rep = thin_triangle_delta(surface, n=2, probes=4, radius=3.0, seed=1)
    assert rep.n_skipped == 0
    assert 0.3 < rep.delta <= GROMOV_H2


def test_thin_triangles_need_negative_curvature():
    with pytest.raises(PreconditionError):
        thin_triangle_delta(flat_plane(), n=1)
