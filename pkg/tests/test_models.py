import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab.errors import ConfigError
from horolab.models import (
    make_constant_diag_profile,
    make_sinusoidal_profile,
    make_tanh_poly_profile,
    profile_from_spec,
    reverse_profile,
    shift_profile,
)

times = st.floats(-20, 20, allow_nan=False)
grid = np.linspace(-6.0, 6.0, 25)


def test_constant_profile_hyperbolic_plane():
    p = make_constant_diag_profile([-1.0])
    assert p.curvature_bound == 1.0
    assert p.kind == "constant_diagonal"
    assert p.dim_manifold == 2
    assert np.array_equal(p.evaluate(3.7), [[-1.0]])


def test_flat_and_symmetric_models():
    p = make_constant_diag_profile([0.0, 0.0, 0.0])
    assert p.curvature_bound == 0.0
    assert np.array_equal(p.evaluate(grid), np.zeros((len(grid), 3, 3)))
    q = make_constant_diag_profile([-4.0, -1.0, -1.0])
    assert q.curvature_bound == 4.0
    assert np.array_equal(q.evaluate(0.0), np.diag([-4.0, -1.0, -1.0]))


def test_positive_eigenvalue_flagged_and_nan_rejected():
    assert "conjugate-point risk" in make_constant_diag_profile([0.5, -1]).flags
    with pytest.raises(ConfigError):
        make_constant_diag_profile([float("nan")])
    with pytest.raises(ConfigError):
        make_constant_diag_profile([])


def test_shift_of_kappa(kappa):
    sh = shift_profile(kappa, math.pi / 2)
    assert np.allclose(sh.evaluate(grid)[:, 0, 0], -2.0 - np.cos(grid), atol=1e-14)


def test_reverse_of_kappa(kappa):
    rv = reverse_profile(kappa)
    assert np.allclose(rv.evaluate(grid)[:, 0, 0], -2.0 + np.sin(grid), atol=1e-14)


def test_constant_profile_is_fixed_by_shift_and_reverse(h2):
    assert shift_profile(h2, 3.0) is h2
    assert reverse_profile(h2) is h2


@given(times, times)
def test_shift_composition(a, b):
    p = make_sinusoidal_profile([[-2.0, 0.3], [0.3, -1.0]], [[0.5, 0.1], [0.1, -0.2]], 1.3, 0.4)
    lhs = shift_profile(shift_profile(p, a), b).evaluate(grid)
    rhs = shift_profile(p, a + b).evaluate(grid)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@given(times)
def test_reverse_involution_and_shift_interplay(a):
    p = make_tanh_poly_profile([[-2.5], [-1.0], [0.5]], scale=0.7)
    assert np.array_equal(reverse_profile(reverse_profile(p)).evaluate(grid), p.evaluate(grid))
    # reversing a shifted profile is the reversed profile shifted the other way
    lhs = reverse_profile(shift_profile(p, a)).evaluate(grid)
    rhs = shift_profile(reverse_profile(p), -a).evaluate(grid)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.floats(-2, 2))
def test_profiles_symmetric_and_bounded(diag, off):
    mean = np.array([[diag[0], off], [off, diag[1]]]) - 4.0
    p = make_sinusoidal_profile(mean, [[0.5, 0.2], [0.2, -0.3]])
    ts = np.linspace(-10, 10, 201)
    R = p.evaluate(ts)
    assert np.max(np.abs(R - np.swapaxes(R, 1, 2))) <= 1e-12 * max(1.0, np.abs(R).max())
    assert np.max(np.linalg.norm(R, 2, axis=(1, 2))) <= p.curvature_bound + 1e-9


def test_profile_from_json_description():
    p = profile_from_spec({"kind": "time_varying", "expr": {"family": "sinusoidal", "mean": -2, "amplitude": -1}})
    assert np.allclose(p.evaluate(grid)[:, 0, 0], -2 - np.sin(grid))
    with pytest.raises(ConfigError):
        profile_from_spec({"kind": "time_varying", "expr": {"family": "exec", "code": "1"}})
    with pytest.raises(ConfigError):
        profile_from_spec({"kind": "nope"})
