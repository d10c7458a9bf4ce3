"""Second fundamental forms of horospheres and the operator ``D = U - S``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import a1, a2, ar_constant
from .errors import PreconditionError
from .jacobi import (
    DEFAULT_TOL,
    _norm2,
    _sym,
    boundary_derivative_S,
    boundary_tensor_S,
    riccati_flow,
    stable_limit,
    unstable_limit,
)
from .models import reverse_profile, shift_profile


@dataclass
class AsymptoticData:
    U: np.ndarray
    S: np.ndarray
    D: np.ndarray
    H: np.ndarray
    h: float
    detD: float
    rho_min: float
    rank: int
    rank_gap: float
    eps_rank: float
    r_used: float
    err_bound: float
    converged: bool
    slow: bool
    monotone: bool
    flags: tuple = field(default=())

    @property
    def eigD(self):
        return np.linalg.eigvalsh(self.D)


def default_eps_rank(R0):
    return 1e-5 * (1.0 + math.sqrt(R0))


def asymptotic_forms(profile, tol=1e-10, eps_rank=None):
    """``U(v)``, ``S(v)`` and everything derived from them.

    ``S`` is the limit along the profile, ``U`` the sign-flipped limit
    along the reversed profile.  Unconverged limits are reported through
    ``converged`` and ``flags`` rather than raised.
    """
    R0 = profile.curvature_bound
    eps = default_eps_rank(R0) if eps_rank is None else eps_rank
    S, ds = stable_limit(profile, tol_limit=tol)
    U, du = unstable_limit(profile, tol_limit=tol)
    D = _sym(U - S)
    H = -0.5 * (U + S)
    ev = np.linalg.eigvalsh(D)
    kernel = ev < eps
    below = ev[kernel]
    above = ev[~kernel]
    gap = (above.min() if above.size else math.inf) - (below.max() if below.size else 0.0)
    flags = []
    if not (ds.converged and du.converged):
        flags.append("unconverged limit")
    if ds.slow or du.slow:
        flags.append("slow convergence")
    if not (ds.monotone and du.monotone):
        flags.append("non-monotone trace")
    flags.extend(profile.flags)
    return AsymptoticData(
        U=U,
        S=S,
        D=D,
        H=H,
        h=float(np.trace(U)),
        detD=float(np.linalg.det(D)),
        rho_min=float(ev.min()),
        rank=int(kernel.sum()) + 1,
        rank_gap=float(gap),
        eps_rank=eps,
        r_used=max(ds.r_star, du.r_star),
        err_bound=max(ds.err_bound, du.err_bound),
        converged=ds.converged and du.converged,
        slow=ds.slow or du.slow,
        monotone=ds.monotone and du.monotone,
        flags=tuple(flags),
    )


@dataclass
class HarmonicityReport:
    h_values: np.ndarray
    h_mean: float
    h_max_dev: float
    asymptotically_harmonic: bool
    unconverged: int


def check_asymptotic_harmonicity(model, direction_sample=16, tol=1e-6, seed=0):
    """``tr U(v)`` over a sample of directions (and footpoints)."""
    if isinstance(direction_sample, int):
        if direction_sample < 16:
            raise PreconditionError("need at least 16 sampled directions")
        direction_sample = model.sample_directions(direction_sample, seed)
    elif len(direction_sample) < 16:
        raise PreconditionError("need at least 16 sampled directions")
    hs, bad = [], 0
    for p, d in direction_sample:
        U, diag = unstable_limit(model.profile_at(p, d), tol_limit=1e-10)
        hs.append(float(np.trace(U)))
        bad += not diag.converged
    hs = np.array(hs)
    dev = float(np.max(np.abs(hs - hs.mean())))
    return HarmonicityReport(hs, float(hs.mean()), dev, dev < tol, bad)


# -- flow of D ----------------------------------------------------------------

@dataclass
class FlowPropagation:
    t: np.ndarray
    U: np.ndarray
    S: np.ndarray

    @property
    def D(self):
        return self.U - self.S

    @property
    def H(self):
        return -0.5 * (self.U + self.S)


def propagate_forms(profile, T, n=None, tol=DEFAULT_TOL):
    """``U(phi^t v)`` and ``S(phi^t v)`` on ``[0, T]`` from the Riccati flow.

    ``U`` is carried forward from ``U(v)``; ``S`` is carried backward from
    ``S(phi^T v)``.  Each direction is the attracting one for its branch.
    """
    U0, _ = unstable_limit(profile, tol_limit=1e-12)
    ST, _ = stable_limit(shift_profile(profile, T), tol_limit=1e-12)
    up = riccati_flow(profile, U0, (0.0, T), tol)
    down = riccati_flow(shift_profile(profile, T), ST, (-T, 0.0), tol)
    ts = np.linspace(0.0, T, n or max(3, int(round(T / 0.25)) + 1))
    return FlowPropagation(ts, up(ts), down(ts - T)), up, down


@dataclass
class DetDReport:
    t: np.ndarray
    detD_shifted: np.ndarray
    detD_riccati: np.ndarray
    deviation: float
    route_disagreement: float
    trH: np.ndarray
    int_trH: np.ndarray
    drift_flag: bool


def check_detD_flow_invariance(profile, T, step=1.0):
    """``max |det D(phi^t v) - det D(v)|`` over ``t`` in ``[0, T]``.

    ``D(phi^t v)`` is computed from limits on shifted profiles and, as a
    cross-check, from the Riccati propagation of ``U`` and ``S``.  The
    trace of ``H`` is reported alongside: ``d/dt log det D = 2 tr H``.
    """
    if not T > 0:
        raise PreconditionError("T must be positive")
    ts = np.arange(0.0, T + 0.5 * step, step)
    det_shift = []
    for t in ts:
        data = asymptotic_forms(shift_profile(profile, t), tol=1e-12)
        det_shift.append(data.detD)
    det_shift = np.array(det_shift)
    prop, _, _ = propagate_forms(profile, T, n=len(ts))
    D = prop.D
    det_ric = np.linalg.det(D)
    trH = np.trace(prop.H, axis1=1, axis2=2)
    # cumulative trapezoid of tr H
    inc = 0.5 * (trH[1:] + trH[:-1]) * np.diff(ts)
    int_trH = np.concatenate([[0.0], np.cumsum(inc)])
    scale = max(1.0, float(np.max(np.abs(det_shift))))
    disagreement = float(np.max(np.abs(det_shift - det_ric)))
    return DetDReport(
        t=ts,
        detD_shifted=det_shift,
        detD_riccati=det_ric,
        deviation=float(np.max(np.abs(det_shift - det_shift[0]))),
        route_disagreement=disagreement,
        trH=trH,
        int_trH=int_trH,
        drift_flag=disagreement > 1e-6 * scale,
    )


@dataclass
class HDDHReport:
    t: np.ndarray
    residual: float
    lhs_max: float


def check_HD_DH_identity(profile, T, U0=None, S0=None, h=1e-3, n=81):
    """``max ||D' - (H D + D H)||`` along the flow, ``D'`` by 5-point differences.

    The identity is only meaningful on the true stable and unstable
    branches; supplied initial values that are off those branches are
    rejected.
    """
    if not T > 0:
        raise PreconditionError("T must be positive")
    U_true, _ = unstable_limit(profile, tol_limit=1e-12)
    S_true, _ = stable_limit(profile, tol_limit=1e-12)
    for given, true, name in ((U0, U_true, "U"), (S0, S_true, "S")):
        if given is not None and _norm2(np.atleast_2d(given) - true) > 1e-6:
            raise PreconditionError(f"{name}0 is not on the {name} branch; identity not applicable")
    _, up, down = propagate_forms(profile, T)

    def D_at(t):
        return up(t) - down(t - T)

    ts = np.linspace(2 * h, T - 2 * h, n)
    dD = (-D_at(ts + 2 * h) + 8 * D_at(ts + h) - 8 * D_at(ts - h) + D_at(ts - 2 * h)) / (12 * h)
    Ut, St = up(ts), down(ts - T)
    Dt, Ht = Ut - St, -0.5 * (Ut + St)
    rhs = Ht @ Dt + Dt @ Ht
    return HDDHReport(ts, float(np.max(_norm2(dD - rhs))), float(np.max(_norm2(dD))))


# -- a-priori bounds ------------------------------------------------------------

def rho_along(profile, shifts=(-10.0, -5.0, 0.0, 5.0, 10.0)):
    """Smallest eigenvalue of ``D(phi^s v)`` over the sampled shifts ``s``."""
    if profile.is_constant:
        shifts = [0.0]
    return min(asymptotic_forms(shift_profile(profile, s)).rho_min for s in shifts)


@dataclass
class ArBoundReport:
    r: np.ndarray
    difference: np.ndarray
    envelope: np.ndarray | None
    a: float | None
    rho: float
    positive: bool
    monotone: bool
    within_envelope: bool | None
    empirical_a: float


def check_ar_bound(profile, r_list=(2.0, 4.0, 8.0, 16.0), shifts=(-10.0, -5.0, 0.0, 5.0, 10.0)):
    """``S(v) - S'_{v,r}(0)`` against the envelope ``a / r`` with ``a = a2^2``.

    The envelope is only asserted when ``D(phi^t v) >= rho > 0`` holds on
    the sampled shifts; otherwise positivity and monotonicity are reported.
    """
    S, _ = stable_limit(profile, tol_limit=1e-12)
    r_arr = np.asarray(r_list, dtype=float)
    diffs = [S - boundary_derivative_S(profile, r) for r in r_arr]
    norms = np.array([_norm2(d) for d in diffs])
    min_eig = min(float(np.linalg.eigvalsh(_sym(d)).min()) for d in diffs)
    rho = rho_along(profile, shifts)
    eps = default_eps_rank(profile.curvature_bound)
    a = env = within = None
    if rho > eps:
        a = ar_constant(profile.curvature_bound, rho)
        env = a / r_arr
        within = bool(np.all(norms <= env))
    return ArBoundReport(
        r=r_arr,
        difference=norms,
        envelope=env,
        a=a,
        rho=rho,
        positive=min_eig > -1e-12,
        monotone=bool(np.all(np.diff(norms) <= 1e-12)),
        within_envelope=within,
        empirical_a=float(np.max(r_arr * norms)),
    )


@dataclass
class DecayReport:
    growth_ok: bool
    growth_constant: float
    a1: float
    decay_checked: bool
    decay_ok: bool | None
    decay_constant: float | None
    a2: float | None
    rho_observed: float
    notes: tuple


def check_decay_bounds(profile, rho, r=10.0, T=None, n=200,
                       shifts=(-10.0, -5.0, 0.0, 5.0, 10.0)):
    """Growth ``||S_{v,r}(-t)|| <= a1 e^{sqrt(R0) t}`` and, when ``D >= rho``
    along the flow, decay ``||S_{v,r}(t)|| <= a2 e^{-rho t / 2}``.

    The empirical constants are the smallest ones that make each bound
    hold on the sampled grid.
    """
    if not rho > 0:
        raise PreconditionError("decay bound needs rho > 0")
    if not r > 1:
        raise PreconditionError("need r > 1")
    T = r if T is None else T
    R0 = profile.curvature_bound
    S = boundary_tensor_S(profile, r, lo=-T)
    tn = np.linspace(0.0, T, n)
    grow = _norm2(S(-tn)) * np.exp(-math.sqrt(R0) * tn)
    g_const = float(grow.max())
    c_a1 = a1(R0)
    rho_obs = rho_along(profile, shifts)
    notes = []
    if rho_obs < rho - 1e-9:
        notes.append(f"D >= rho fails (observed {rho_obs:.6g}); decay bound not checked")
        return DecayReport(g_const <= c_a1, g_const, c_a1, False, None, None, None, rho_obs, tuple(notes))
    tp = np.linspace(0.0, min(T, r), n, endpoint=False)
    dec = _norm2(S(tp)) * np.exp(0.5 * rho * tp)
    d_const = float(dec.max())
    c_a2 = a2(R0, rho)
    return DecayReport(g_const <= c_a1, g_const, c_a1, True, d_const <= c_a2, d_const, c_a2,
                       rho_obs, tuple(notes))
