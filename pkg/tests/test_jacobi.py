import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab.errors import BlowUpError, PreconditionError, ProfileMismatchError
from horolab.jacobi import (
    a_tensor,
    boundary_derivative_S,
    boundary_derivative_U,
    boundary_norm_bound_check,
    boundary_tensor_S,
    boundary_tensor_U,
    c_tensor,
    check_transform_identity,
    integrate_jacobi,
    riccati_bounds_check,
    riccati_flow,
    stable_limit,
    stable_tensor,
    unstable_limit,
    unstable_tensor,
    verify_central_identities,
    wronskian,
)
from horolab.models import (
    make_constant_diag_profile,
    make_sinusoidal_profile,
    make_tanh_poly_profile,
    reverse_profile,
)

from conftest import coth

ts = np.linspace(0.0, 5.0, 21)


def test_a_and_c_tensors_on_h2(h2):
    A = a_tensor(h2, 5.0)
    C = c_tensor(h2, 5.0)
    assert np.allclose(A(ts)[:, 0, 0], np.sinh(ts), rtol=1e-9, atol=1e-12)
    assert np.allclose(C(ts)[:, 0, 0], np.cosh(ts), rtol=1e-9)
    assert A.role == "A"
    assert A.residual_max < 1e-7 * 2 * np.max(np.abs(A.Y))


def test_flat_a_tensor(flat):
    A = a_tensor(flat, 5.0)
    assert np.allclose(A(ts)[:, 0, 0], ts, atol=1e-12)


def test_boundary_tensors_on_h2(h2):
    r = 4.0
    S = boundary_tensor_S(h2, r)
    grid = np.linspace(0, r, 17)
    assert np.allclose(S(grid)[:, 0, 0], np.sinh(r - grid) / math.sinh(r), atol=1e-10)
    U = boundary_tensor_U(h2, r)
    assert np.allclose(U(-grid)[:, 0, 0], np.sinh(r - grid) / math.sinh(r), atol=1e-10)
    assert boundary_derivative_S(h2, r)[0, 0] == pytest.approx(-coth(r), abs=1e-10)
    assert boundary_derivative_U(h2, r)[0, 0] == pytest.approx(coth(r), abs=1e-10)


def test_boundary_tensor_methods_agree(kappa):
    back = boundary_tensor_S(kappa, 6.0)
    fund = boundary_tensor_S(kappa, 6.0, method="fundamental")
    grid = np.linspace(0, 6, 13)
    assert np.max(np.abs(back(grid) - fund(grid))) < 1e-8


def test_flat_boundary_derivative(flat):
    for r in (2.0, 5.0, 40.0):
        assert boundary_derivative_S(flat, r)[0, 0] == pytest.approx(-1.0 / r, abs=1e-12)


def test_stable_limits_closed_forms(h2, flat, quat):
    S, d = stable_limit(h2)
    assert S[0, 0] == pytest.approx(-1.0, abs=1e-10) and d.converged and d.monotone
    U, _ = unstable_limit(h2)
    assert U[0, 0] == pytest.approx(1.0, abs=1e-10)
    Sf, df = stable_limit(flat)
    assert abs(Sf[0, 0]) < 1e-8 and df.slow
    Sq, _ = stable_limit(quat)
    assert np.allclose(Sq, -np.diag([2.0, 1.0, 1.0]), atol=1e-9)


def test_stable_limit_of_kappa_matches_fundamental_route(kappa):
    S, d = stable_limit(kappa)
    fund = boundary_tensor_S(kappa, 40.0, method="fundamental")
    assert S[0, 0] == pytest.approx(fund.at(0.0)[1][0, 0], abs=1e-8)
    U, _ = unstable_limit(kappa)
    assert U[0, 0] == pytest.approx(-stable_limit(reverse_profile(kappa))[0][0, 0], abs=1e-14)
    assert U[0, 0] > 0 > S[0, 0]


@given(st.lists(st.floats(-9.0, -0.25), min_size=1, max_size=3))
def test_riccati_fixed_points(eigs):
    p = make_constant_diag_profile(eigs)
    root = np.sqrt(-np.array(eigs))
    assert np.allclose(np.diag(stable_limit(p)[0]), -root, atol=1e-8)
    assert np.allclose(np.diag(unstable_limit(p)[0]), root, atol=1e-8)


def test_stable_and_unstable_tensors_decay_and_grow(h2):
    S = stable_tensor(h2, 6.0)
    U = unstable_tensor(h2, 6.0)
    grid = np.linspace(0, 6, 13)
    assert np.allclose(S(grid)[:, 0, 0], np.exp(-grid), rtol=1e-8)
    assert np.allclose(U(grid)[:, 0, 0], np.exp(grid), rtol=1e-8)


def test_riccati_flow_fixed_point_and_blowup(h2):
    path = riccati_flow(h2, np.array([[1.0]]), (0.0, 5.0))
    assert np.allclose(path(np.linspace(0, 5, 11))[:, 0, 0], 1.0, atol=1e-10)
    # V' = 1 - V^2 with V(0) = -2 is -coth(atanh(1/2) - t)
    with pytest.raises(BlowUpError) as exc:
        riccati_flow(h2, np.array([[-2.0]]), (0.0, 2.0))
    assert exc.value.t == pytest.approx(math.atanh(0.5), abs=1e-4)
    with pytest.raises(BlowUpError) as exc:
        riccati_flow(h2, np.array([[coth(1.0)]]), (-2.0, 0.0))
    assert exc.value.t == pytest.approx(-1.0, abs=1e-4)


@given(st.floats(-3.0, -1.0), st.floats(-0.9, 0.9), st.floats(0.5, 2.0))
def test_riccati_symmetry_preserved(mean, amp, freq):
    p = make_sinusoidal_profile([[mean, 0.3], [0.3, mean - 0.5]], [[amp, 0.2], [0.2, 0.0]], freq)
    V0 = unstable_limit(p)[0]
    path = riccati_flow(p, V0, (0.0, 4.0))
    assert path.asymmetry < 1e-9
    assert path.residual_max < 1e-7 * (1 + p.curvature_bound) ** 2


def test_wronskian_constant_and_mismatch(kappa, h2):
    A, C = a_tensor(kappa, 6.0), c_tensor(kappa, 6.0)
    grid = np.linspace(0, 6, 25)
    W = wronskian(A, C, grid)
    assert np.max(np.abs(W - W[0])) < 1e-8 * np.max(np.abs(A(grid)) * 10)
    assert A.lagrangian_drift() < 1e-8
    Ah = a_tensor(h2, 3.0)
    assert np.allclose(wronskian(Ah, c_tensor(h2, 3.0), grid[:10]), 1.0, atol=1e-9)
    with pytest.raises(ProfileMismatchError):
        wronskian(A, Ah, 1.0)


def test_integrate_jacobi_matches_a_tensor(kappa):
    path = integrate_jacobi(kappa, np.zeros((1, 1)), np.eye(1), (0.0, 5.0))
    assert np.allclose(path(ts), a_tensor(kappa, 5.0)(ts), atol=1e-9)
    with pytest.raises(PreconditionError):
        integrate_jacobi(kappa, np.zeros((1, 1)), np.eye(1), (0.0, 5.0), tol=-1)


def test_central_identities(kappa):
    rep = verify_central_identities(kappa, 12.0, [1.0, 4.0, 8.0])
    assert max(rep.max_residuals.values()) < 1e-6
    with pytest.raises(PreconditionError):
        verify_central_identities(kappa, 5.0, [6.0])


@given(st.floats(0.5, 5.0), st.floats(0.5, 6.0))
def test_transform_identity(t, x):
    p = make_tanh_poly_profile([[[-2.0, 0.2], [0.2, -1.0]], [[0.5, 0.0], [0.0, -0.5]]])
    assert check_transform_identity(p, t, x) < 1e-6


@pytest.mark.parametrize("eigs", [[-1.0], [0.0], [-4.0, -1.0, -1.0]])
def test_a_priori_bounds_constant(eigs):
    p = make_constant_diag_profile(eigs)
    assert riccati_bounds_check(p).holds
    assert boundary_norm_bound_check(p).holds


@given(st.floats(-3.0, -1.2), st.floats(-1.0, 1.0))
def test_a_priori_bounds_random_profiles(mean, amp):
    p = make_sinusoidal_profile(mean, amp)
    assert riccati_bounds_check(p, T=8.0, n=100).holds
    assert boundary_norm_bound_check(p).holds
