import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab.errors import ConfigError, PreconditionError
from horolab.surfaces import (
    ConformalSurface,
    busemann_value,
    flat_plane,
    hyperbolic_plane,
    pinched_surface,
    surface_distance,
    surface_from_spec,
    surface_geodesic,
)

H2 = hyperbolic_plane()
PINCHED = pinched_surface()
FLAT = flat_plane()


def h2_distance(p, q):
    (x1, y1), (x2, y2) = p, q
    return math.acosh(1 + ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (2 * y1 * y2))


def test_hyperbolic_curvature_is_minus_one():
    rng = np.random.default_rng(1)
    x, y = rng.uniform(-3, 3, 50), rng.uniform(0.1, 5, 50)
    assert np.max(np.abs(H2.curvature(x, y) + 1.0)) < 1e-10


@pytest.mark.parametrize("surface", [PINCHED, ConformalSurface("sinusoidal", {"amplitude": 0.3}),
                                     ConformalSurface("tanh_poly", {"coefficients": [-0.2, 0.1, 0.05]})])
def test_curvature_matches_finite_differences(surface):
    rng = np.random.default_rng(7)
    for _ in range(20):
        x, y = rng.uniform(-1.5, 1.5), rng.uniform(0.5, 2.0)
        K = surface.curvature(x, y)
        assert abs(surface.curvature_fd(x, y) - K) < 1e-5 * max(1.0, abs(K))


def test_curvature_gradient_matches_differences():
    x, y, h = 0.4, 1.3, 1e-5
    kx, ky = PINCHED.curvature_grad(x, y)
    fx = (PINCHED.curvature(x + h, y) - PINCHED.curvature(x - h, y)) / (2 * h)
    fy = (PINCHED.curvature(x, y + h) - PINCHED.curvature(x, y - h)) / (2 * h)
    assert abs(kx - fx) < 1e-7 and abs(ky - fy) < 1e-7


def test_vertical_geodesic_in_half_plane():
    path, prof = surface_geodesic(H2, (0.0, 1.0), math.pi / 2, T=3.0)
    ts = np.linspace(-3, 3, 31)
    x, y = path.point(ts)
    assert np.max(np.abs(x)) < 1e-12
    assert np.max(np.abs(y / np.exp(ts) - 1)) < 1e-9
    assert path.unit_speed
    assert prof.kind == "surface_borne"


def test_flat_geodesic_is_a_straight_line():
    path, _ = surface_geodesic(FLAT, (1.0, 2.0), 0.3, T=4.0)
    ts = np.linspace(-4, 4, 17)
    x, y = path.point(ts)
    assert np.allclose(x, 1 + ts * math.cos(0.3), atol=1e-10)
    assert np.allclose(y, 2 + ts * math.sin(0.3), atol=1e-10)


def test_pinched_profile_range_and_consistency():
    path, prof = surface_geodesic(PINCHED, (0.3, 1.0), 0.7, T=8.0)
    ts = np.linspace(-8, 8, 50)
    K = prof.evaluate(ts)[:, 0, 0]
    assert np.all(K >= -1.5 - 1e-9) and np.all(K <= -1.0 + 1e-9)
    x, y = path.point(ts)
    assert np.max(np.abs(K - PINCHED.curvature(x, y))) < 1e-10
    lo, hi = PINCHED.curvature_range
    assert lo == pytest.approx(-1.5, abs=1e-6) and hi == pytest.approx(-1.0, abs=1e-6)
    assert path.unit_speed
    assert path.geodesic_residual() < 1e-6


def test_distances():
    assert surface_distance(H2, (0.0, 1.0), (0.0, math.e)) == pytest.approx(1.0, abs=1e-9)
    assert surface_distance(FLAT, (0.0, 0.0), (3.0, 4.0)) == pytest.approx(5.0, abs=1e-9)
    assert surface_distance(H2, (0.3, 0.3), (0.3, 0.3)) == 0.0


@given(st.floats(-2, 2), st.floats(0.3, 3), st.floats(-2, 2), st.floats(0.3, 3))
def test_h2_distance_oracle_and_symmetry(x1, y1, x2, y2):
    p, q = (x1, y1), (x2, y2)
    if h2_distance(p, q) < 1e-6:
        return
    d1 = surface_distance(H2, p, q)
    assert d1 == pytest.approx(h2_distance(p, q), abs=1e-7)
    assert abs(d1 - surface_distance(H2, q, p)) < 1e-8


def test_pinched_distance_symmetric():
    p, q = (0.2, 0.8), (1.4, 2.1)
    assert abs(surface_distance(PINCHED, p, q) - surface_distance(PINCHED, q, p)) < 1e-8


def test_busemann_oracles():
    v = ((0.0, 1.0), math.pi / 2)
    b = busemann_value(H2, v, (0.0, math.e))
    assert b.value == pytest.approx(-1.0, abs=1e-7)
    assert b.converged
    on_ray = busemann_value(H2, v, (0.0, math.exp(2.5)))
    assert on_ray.value == pytest.approx(-2.5, abs=1e-7)
    q = (1.2, 0.7)
    assert busemann_value(H2, v, q).value == pytest.approx(-math.log(0.7), abs=1e-6)


@given(st.floats(-1.5, 1.5), st.floats(0.4, 2.5))
def test_busemann_bounded_by_distance(x, y):
    v = ((0.0, 1.0), 1.2)
    q = (x, y)
    d = surface_distance(PINCHED, v[0], q)
    assert abs(busemann_value(PINCHED, v, q).value) <= d + 1e-6


def test_busemann_horizon_convergence_on_pinched():
    v = ((0.0, 1.0), 2.0)
    q = (0.8, 1.9)
    b10 = busemann_value(PINCHED, v, q, T_horizon=10.0).value
    b20 = busemann_value(PINCHED, v, q, T_horizon=20.0).value
    assert abs(b20 - b10) < 1e-4


def test_busemann_preconditions():
    with pytest.raises(PreconditionError):
        busemann_value(H2, ((0.0, 1.0), 0.0), (0.0, 2.0), T_horizon=5.0)
    with pytest.raises(PreconditionError):
        busemann_value(FLAT, ((0.0, 0.0), 0.0), (1.0, 0.0))


def test_surface_config_only_named_families():
    s = surface_from_spec({"kind": "surface", "phi": {"family": "pinched"}})
    assert s.strictly_negative
    with pytest.raises(ConfigError):
        surface_from_spec({"kind": "surface", "phi": {"family": "eval", "expr": "x"}})
