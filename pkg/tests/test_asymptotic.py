import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab import constants
from horolab.asymptotic import (
    asymptotic_forms,
    check_ar_bound,
    check_asymptotic_harmonicity,
    check_decay_bounds,
    check_detD_flow_invariance,
    check_HD_DH_identity,
    rho_along,
)
from horolab.errors import PreconditionError
from horolab.models import make_constant_diag_profile, make_sinusoidal_profile

from conftest import coth


def test_forms_on_h2(h2):
    d = asymptotic_forms(h2)
    assert d.U[0, 0] == pytest.approx(1.0, abs=1e-10)
    assert d.S[0, 0] == pytest.approx(-1.0, abs=1e-10)
    assert d.D[0, 0] == pytest.approx(2.0, abs=1e-10)
    assert abs(d.H[0, 0]) < 1e-10
    assert d.h == pytest.approx(1.0, abs=1e-10)
    assert d.rank == 1 and d.converged and not d.flags


def test_forms_on_flat_and_quaternionic(flat, quat):
    f = asymptotic_forms(flat)
    assert f.rank == 2 and abs(f.h) < 1e-8 and "slow convergence" in f.flags
    q = asymptotic_forms(quat)
    assert np.allclose(q.eigD, [2.0, 2.0, 4.0], atol=1e-9)
    assert q.h == pytest.approx(4.0, abs=1e-9)
    assert q.detD == pytest.approx(16.0, abs=1e-8)
    assert q.rank == 1


# eigenvalues in (-1e-4, 0) only settle beyond the largest doubling radius
curvatures = st.one_of(st.just(0.0), st.floats(-9.0, -1e-4))


@given(st.lists(curvatures, min_size=1, max_size=3))
def test_constant_curvature_forms(eigs):
    d = asymptotic_forms(make_constant_diag_profile(eigs))
    root = np.sqrt(-np.array(eigs))
    assert np.allclose(np.sort(d.eigD), np.sort(2 * root), atol=2e-5)
    assert np.max(np.abs(d.H)) < 2e-5
    # rank counts kernel directions of D, plus the flow direction
    assert d.rank == 1 + int(np.sum(2 * root < d.eps_rank))


def test_nearly_flat_direction_is_flagged():
    d = asymptotic_forms(make_constant_diag_profile([-1e-9]))
    assert not d.converged and "unconverged limit" in d.flags
    assert abs(d.U[0, 0] - math.sqrt(1e-9)) <= 2 * d.err_bound


def test_harmonicity(h2_model, quat_model):
    rep = check_asymptotic_harmonicity(h2_model)
    assert rep.asymptotically_harmonic and rep.h_mean == pytest.approx(1.0, abs=1e-9)
    assert check_asymptotic_harmonicity(quat_model).h_mean == pytest.approx(4.0, abs=1e-9)
    with pytest.raises(PreconditionError):
        check_asymptotic_harmonicity(h2_model, direction_sample=8)


def test_detD_invariance_on_space_form(quat):
    rep = check_detD_flow_invariance(quat, 4.0)
    assert rep.deviation < 1e-8 and not rep.drift_flag
    assert np.allclose(rep.trH, 0.0, atol=1e-8)


def test_detD_flow_identity_on_varying_profile(kappa):
    # along the flow, log det D changes by 2 int tr H
    rep = check_detD_flow_invariance(kappa, 6.0, step=0.25)
    assert rep.route_disagreement < 1e-6
    pred = rep.detD_shifted[0] * np.exp(2 * rep.int_trH)
    assert np.max(np.abs(pred - rep.detD_shifted) / rep.detD_shifted) < 5e-3


def test_HD_DH_identity(kappa, h2):
    rep = check_HD_DH_identity(kappa, 5.0)
    assert rep.residual < 1e-5 * max(1.0, rep.lhs_max)
    with pytest.raises(PreconditionError):
        check_HD_DH_identity(h2, 5.0, U0=np.array([[0.5]]))


def test_ar_bound_h2(h2):
    rep = check_ar_bound(h2)
    exact = np.array([coth(r) - 1.0 for r in rep.r])
    assert np.allclose(rep.difference, exact, atol=1e-10)
    assert rep.within_envelope and rep.positive and rep.monotone
    assert rep.a == pytest.approx(constants.ar_constant(1.0, 2.0))


def test_ar_bound_flat_is_one_over_r(flat):
    rep = check_ar_bound(flat)
    assert np.allclose(rep.difference, 1.0 / rep.r, atol=1e-8)
    assert rep.envelope is None and rep.rho < 1e-6
    assert rep.empirical_a == pytest.approx(1.0, abs=1e-6)


def test_rho_along(kappa, h2):
    assert rho_along(h2) == pytest.approx(2.0, abs=1e-9)
    assert 2 * math.sqrt(2.0) - 1 < rho_along(kappa) < 2 * math.sqrt(3.0)


@pytest.mark.parametrize("prof", [make_constant_diag_profile([-1.0]),
                                  make_constant_diag_profile([-4.0, -1.0, -1.0]),
                                  make_sinusoidal_profile(-2.0, -1.0)])
def test_decay_bounds(prof):
    rho = rho_along(prof)
    rep = check_decay_bounds(prof, rho)
    assert rep.growth_ok and rep.decay_checked and rep.decay_ok
    with pytest.raises(PreconditionError):
        check_decay_bounds(prof, 0.0)


def test_decay_not_checked_when_rho_too_large(h2):
    rep = check_decay_bounds(h2, 3.0)
    assert not rep.decay_checked and rep.notes


def test_constants_flat_limits():
    assert constants.sqrt_coth(0.0, 2.0) == pytest.approx(0.5)
    assert constants.sqrt_coth(1.0, 2.0) == pytest.approx(coth(2.0))
    assert constants.a1(0.0) == math.inf
    assert constants.a1(1.0) == pytest.approx(1 / (1 - math.exp(-2)))
    with pytest.raises(ValueError):
        constants.a2(1.0, 0.0)


@given(st.floats(0.1, 9.0), st.floats(0.1, 4.0), st.floats(1.0, 10.0))
def test_constants_positive_and_monotone(R0, rho, r):
    pc = constants.proof_constants(R0, 1.0, rho, r)
    assert all(v > 0 for v in pc.values())
    assert constants.C5(R0, 1.0, rho, r + 1) > pc["C5"]
    assert constants.b_function(0.0, R0, rho) == pytest.approx(pc["a2"])


@given(st.floats(-10.0, 10.0))
def test_rank_invariant_under_flow(s):
    from horolab.models import shift_profile

    kappa = make_sinusoidal_profile(-2.0, -1.0)
    assert asymptotic_forms(shift_profile(kappa, s)).rank == 1
    mixed = make_sinusoidal_profile([[-2.0, 0.0], [0.0, 0.0]], [[-1.0, 0.0], [0.0, 0.0]])
    assert asymptotic_forms(shift_profile(mixed, s)).rank == 2


@pytest.mark.slow
def test_variable_curvature_surface_is_not_harmonic():
    from horolab.manifolds import SurfaceModel
    from horolab.surfaces import pinched_surface

    rep = check_asymptotic_harmonicity(SurfaceModel(pinched_surface(), (0.5, 1.0)))
    assert rep.h_max_dev > 0.01 and not rep.asymptotically_harmonic
