"""Matrix Jacobi and Riccati equations along a curvature profile.

Conventions: ``A`` has ``A(0) = 0, A'(0) = I``; ``C`` has ``C(0) = I,
C'(0) = 0``; ``S_{v,r}`` has ``S(0) = I, S(r) = 0``; ``U_{v,r}(t) =
S_{-v,r}(-t)``.  ``S(v)`` and ``U(v)`` denote the limits of
``S'_{v,r}(0)`` and ``U'_{v,r}(0)`` as ``r -> infinity``.

Boundary tensors are computed by integrating backwards from the zero at
``t = r`` and normalising at ``t = 0``.  This never subtracts two
exponentially large quantities, which the textbook formula
``C - A A(r)^{-1} C(r)`` does for large ``r``; the latter is kept as
``method="fundamental"`` for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C1, sqrt_coth
from .errors import (
    BlowUpError,
    IntegrationError,
    PreconditionError,
    ProfileMismatchError,
)
from .models import reverse_profile, shift_profile
from .ode import ATOL, PiecewiseSolution, central_diff, gauss_panels, integrate, inv_checked, solve_checked

ROLES = ("A", "C", "S_r", "U_r", "S_stable", "U_stable", "custom")
DEFAULT_TOL = 1e-11


def _norm2(M):
    """Spectral norm of a matrix or a stack of matrices."""
    M = np.asarray(M)
    if M.ndim == 2:
        return float(np.linalg.norm(M, 2))
    return np.linalg.norm(M, 2, axis=(-2, -1))


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


class _Dense:
    """``t -> (Y(t), Y'(t))`` from a state solution, ``Y = Z(sigma t) M``."""

    def __init__(self, sol, m, right=None, sigma=1.0):
        self.sol, self.m, self.sigma = sol, m, sigma
        self.right = np.eye(m) if right is None else right
        self.lo = sol.lo if sigma > 0 else -sol.hi
        self.hi = sol.hi if sigma > 0 else -sol.lo

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = self.sol(self.sigma * t)
        m, mm = self.m, self.m * self.m
        if t.ndim == 0:
            Z, Zp = s[:mm].reshape(m, m), s[mm:].reshape(m, m)
        else:
            Z = s[:mm].T.reshape(-1, m, m)
            Zp = s[mm:].T.reshape(-1, m, m)
        return Z @ self.right, self.sigma * (Zp @ self.right)


class _Combo:
    """``Y = Y1 + Y2 K`` for two dense Jacobi solutions."""

    def __init__(self, d1, d2, K):
        self.d1, self.d2, self.K = d1, d2, K
        self.lo, self.hi = max(d1.lo, d2.lo), min(d1.hi, d2.hi)

    def __call__(self, t):
        Y1, P1 = self.d1(t)
        Y2, P2 = self.d2(t)
        return Y1 + Y2 @ self.K, P1 + P2 @ self.K


@dataclass(eq=False)
class JacobiTensorPath:
    """Sampled solution of ``Y'' + R Y = 0`` with a dense evaluator."""

    t: np.ndarray
    Y: np.ndarray
    Yp: np.ndarray
    profile: object
    role: str
    residual_max: float
    dense: object = field(repr=False)

    def at(self, t):
        """``(Y(t), Y'(t))``; scalar ``t`` gives ``(m, m)`` matrices."""
        return self.dense(t)

    def __call__(self, t):
        return self.dense(t)[0]

    @property
    def interval(self):
        return self.dense.lo, self.dense.hi

    @property
    def dim(self):
        return self.Y.shape[-1]

    def lagrangian_drift(self):
        """Max over the grid of ``||W(Y, Y)(t) - W(Y, Y)(t_0)||``."""
        W = np.swapaxes(self.Yp, 1, 2) @ self.Y - np.swapaxes(self.Y, 1, 2) @ self.Yp
        return float(np.max(_norm2(W - W[0])))

    def min_singular(self, t=None):
        Y = self.Y if t is None else self(t)
        return np.linalg.svd(Y, compute_uv=False)[..., -1]


def _jacobi_rhs(profile, m):
    mm = m * m

    def rhs(t, y):
        R = profile.evaluate(t)
        Y = y[:mm].reshape(m, m)
        return np.concatenate([y[mm:], -(R @ Y).ravel()])

    return rhs


def _solve_state(profile, t0, Y0, Y0p, lo, hi, tol):
    """Integrate from ``t0`` to both ends of ``[lo, hi]``."""
    m = profile.dim_normal
    y0 = np.concatenate([np.asarray(Y0, float).ravel(), np.asarray(Y0p, float).ravel()])
    rhs = _jacobi_rhs(profile, m)
    pieces, grids = [], []
    for end in (lo, hi):
        if end == t0:
            continue
        res = integrate(rhs, t0, end, y0, rtol=tol, atol=ATOL)
        pieces.append((min(t0, end), max(t0, end), res.sol))
        grids.append(res.t)
    if not pieces:
        raise PreconditionError("empty interval")
    return PiecewiseSolution(pieces), np.unique(np.concatenate(grids))


def _residual(profile, dense, grid, h=1e-3):
    """``max ||Y'' + R Y||`` on interior grid points, ``Y''`` from a 5-point stencil."""
    lo, hi = dense.lo + 2 * h, dense.hi - 2 * h
    ts = grid[(grid > lo) & (grid < hi)]
    if ts.size == 0:
        return 0.0
    Ypp = central_diff(lambda s: dense(s)[1], ts, h, order=4)
    Y = dense(ts)[0]
    R = profile.evaluate(ts)
    return float(np.max(_norm2(Ypp + R @ Y)))


def _make_path(profile, dense, grid, role):
    Y, Yp = dense(grid)
    return JacobiTensorPath(
        t=grid,
        Y=Y,
        Yp=Yp,
        profile=profile,
        role=role,
        residual_max=_residual(profile, dense, grid),
        dense=dense,
    )


def _check_interval(interval, tol):
    lo, hi = (float(v) for v in interval)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise PreconditionError(f"interval must be finite and nonempty, got {interval}")
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    return lo, hi


def integrate_jacobi(profile, Y0, Y0p, interval, tol=DEFAULT_TOL, t0=0.0, role="custom"):
    """Solve ``Y'' + R Y = 0`` with ``Y(t0) = Y0, Y'(t0) = Y0p`` on ``interval``."""
    lo, hi = _check_interval(interval, tol)
    if not lo <= t0 <= hi:
        raise PreconditionError("initial time must lie in the interval")
    m = profile.dim_normal
    Y0 = np.atleast_2d(np.asarray(Y0, float))
    Y0p = np.atleast_2d(np.asarray(Y0p, float))
    if Y0.shape != (m, m) or Y0p.shape != (m, m):
        raise PreconditionError(f"initial data must be {m}x{m}")
    sol, grid = _solve_state(profile, t0, Y0, Y0p, lo, hi, tol)
    return _make_path(profile, _Dense(sol, m), grid, role)


def _span(T):
    return (0.0, T) if T > 0 else (T, 0.0)


def a_tensor(profile, T, tol=DEFAULT_TOL):
    m = profile.dim_normal
    return integrate_jacobi(profile, np.zeros((m, m)), np.eye(m), _span(T), tol, role="A")


def c_tensor(profile, T, tol=DEFAULT_TOL):
    m = profile.dim_normal
    return integrate_jacobi(profile, np.eye(m), np.zeros((m, m)), _span(T), tol, role="C")


def _backward_from_zero(profile, r, lo, tol):
    m = profile.dim_normal
    sol, grid = _solve_state(profile, r, np.zeros((m, m)), -np.eye(m), min(lo, 0.0), r, tol)
    Z0 = _Dense(sol, m)(0.0)[0]
    return sol, grid, inv_checked(Z0, "S_{v,r} normaliser (conjugate point?)")


def boundary_tensor_S(profile, r, tol=DEFAULT_TOL, lo=0.0, method="backward"):
    """``S_{v,r}`` on ``[lo, r]`` (``lo <= 0``)."""
    if not r > 0:
        raise PreconditionError("r must be positive")
    m = profile.dim_normal
    lo = min(float(lo), 0.0)
    if method == "backward":
        sol, grid, M = _backward_from_zero(profile, r, lo, tol)
        return _make_path(profile, _Dense(sol, m, right=M), grid, "S_r")
    if method == "fundamental":
        A = integrate_jacobi(profile, np.zeros((m, m)), np.eye(m), (lo, r), tol)
        C = integrate_jacobi(profile, np.eye(m), np.zeros((m, m)), (lo, r), tol)
        K = -solve_checked(A(r), C(r), "A(r) (conjugate point?)")
        grid = np.unique(np.concatenate([A.t, C.t]))
        return _make_path(profile, _Combo(C.dense, A.dense, K), grid, "S_r")
    raise PreconditionError(f"unknown method {method!r}")


def _reflect(path, profile, role):
    """View of ``t -> path(-t)`` as a Jacobi path along ``profile``."""
    src = path.dense
    if isinstance(src, _Dense):
        dense = _Dense(src.sol, src.m, src.right, -src.sigma)
    else:
        dense = _ReflectedCombo(src)
    grid = -path.t[::-1]
    Y, Yp = dense(grid)
    return JacobiTensorPath(grid, Y, Yp, profile, role, path.residual_max, dense)


class _ReflectedCombo:
    def __init__(self, inner):
        self.inner = inner
        self.lo, self.hi = -inner.hi, -inner.lo

    def __call__(self, t):
        Y, Yp = self.inner(-np.asarray(t, dtype=float))
        return Y, -Yp


def boundary_tensor_U(profile, r, tol=DEFAULT_TOL, hi=0.0, method="backward"):
    """``U_{v,r}(t) = S_{-v,r}(-t)`` on ``[-r, hi]`` (``hi >= 0``)."""
    S = boundary_tensor_S(reverse_profile(profile), r, tol, lo=-max(float(hi), 0.0), method=method)
    return _reflect(S, profile, "U_r")


# -- Riccati ------------------------------------------------------------------

def _riccati_rhs(profile, m):
    def rhs(t, y):
        V = y.reshape(m, m)
        return (-(V @ V) - profile.evaluate(t)).ravel()

    return rhs


def boundary_derivative_S(profile, r, tol=DEFAULT_TOL):
    """``S'_{v,r}(0)`` without forming exponentially large tensors.

    Over the last unit before ``r`` the Jacobi equation is integrated from
    the zero; from there ``V = S' S^{-1}`` follows the Riccati equation
    backwards, where the stable branch is attracting.
    """
    if not r > 0:
        raise PreconditionError("r must be positive")
    m = profile.dim_normal
    r = float(r)
    mid = max(r - 1.0, 0.0)
    sol, _ = _solve_state(profile, r, np.zeros((m, m)), -np.eye(m), mid, r, tol)
    Z, Zp = _Dense(sol, m)(mid)
    V = _sym(Zp @ inv_checked(Z, "S_{v,r}"))
    if mid > 0:
        res = integrate(_riccati_rhs(profile, m), mid, 0.0, V.ravel(), rtol=tol, atol=ATOL)
        V = _sym(res.y[:, -1].reshape(m, m))
    return V


def boundary_derivative_U(profile, r, tol=DEFAULT_TOL):
    return -boundary_derivative_S(reverse_profile(profile), r, tol)


@dataclass
class StableLimitDiagnostics:
    r_star: float
    converged: bool
    slow: bool
    increment: float
    err_bound: float
    trace_r: list
    trace_values: list
    monotone: bool
    monotone_violation: float
    envelope: float | None = None


def stable_limit(profile, tol_limit=1e-10, r_start=8.0, r_max=2.0**14, rho=None,
                 tol=DEFAULT_TOL, mono_tol=1e-9):
    """``S(v) = lim S'_{v,r}(0)`` by doubling ``r``.

    Converges when the raw Cauchy increment drops below ``tol_limit``.
    Sequences that converge like ``1/r`` (flat directions) are accepted
    when their Richardson extrapolants ``2 X_{2r} - X_r`` agree to
    ``tol_limit``; those carry ``slow=True``.  Increments below 1e-9 that
    stop shrinking are at the integrator noise floor and are accepted too.
    """
    if not tol_limit > 0:
        raise PreconditionError("tol_limit must be positive")
    rs, xs, rich = [], [], []
    violation = 0.0
    prev = None
    r = float(r_start)
    result = None
    while r <= r_max:
        X = boundary_derivative_S(profile, r, tol)
        if xs:
            d = X - xs[-1]
            violation = max(violation, -float(np.linalg.eigvalsh(_sym(d)).min()))
            inc = _norm2(d)
            rich.append(2 * X - xs[-1])
            rs.append(r)
            xs.append(X)
            if inc < tol_limit:
                result = (X, False, inc, inc)
                break
            # below 1e-9 an increment that no longer shrinks is integrator noise
            if prev is not None and inc < 1e-9 * (1.0 + _norm2(X)) and inc > 0.25 * prev:
                result = (X, False, inc, inc)
                break
            prev = inc
            if len(rich) >= 2:
                rinc = _norm2(rich[-1] - rich[-2])
                if rinc < tol_limit:
                    result = (rich[-1], True, inc, rinc)
                    break
        else:
            rs.append(r)
            xs.append(X)
        r *= 2
    converged = result is not None
    if not converged:
        inc = _norm2(xs[-1] - xs[-2]) if len(xs) > 1 else math.inf
        result = (xs[-1], False, inc, inc)
    value, slow, inc, err = result
    envelope = None
    if rho is not None and rho > 0:
        from .constants import ar_constant

        envelope = ar_constant(profile.curvature_bound, rho) / rs[-1]
    diag = StableLimitDiagnostics(
        r_star=rs[-1],
        converged=converged,
        slow=slow,
        increment=inc,
        err_bound=err,
        trace_r=rs,
        trace_values=xs,
        monotone=violation <= mono_tol,
        monotone_violation=violation,
        envelope=envelope,
    )
    return _sym(value), diag


def unstable_limit(profile, **kwargs):
    """``U(v) = -S(-v)``."""
    S, diag = stable_limit(reverse_profile(profile), **kwargs)
    return -S, diag


def stable_tensor(profile, T, lo=0.0, pad=32.0, tol=DEFAULT_TOL):
    """``S_v`` on ``[lo, T]`` approximated by ``S_{v, T + pad}``."""
    path = boundary_tensor_S(profile, T + pad, tol, lo=lo)
    path.role = "S_stable"
    return path


def unstable_tensor(profile, T, pad=32.0, tol=DEFAULT_TOL):
    """``U_v(t) = S_{-v}(-t)`` on ``[-(T + pad), T]``."""
    S = boundary_tensor_S(reverse_profile(profile), T + pad, tol, lo=-T)
    U = _reflect(S, profile, "U_stable")
    return U


@dataclass(eq=False)
class RiccatiPath:
    t: np.ndarray
    V: np.ndarray
    profile: object
    residual_max: float
    asymmetry: float
    dense: object = field(repr=False)

    def __call__(self, t):
        return self.dense(t)


class _RiccatiDense:
    def __init__(self, sol, m):
        self.sol, self.m = sol, m
        self.lo, self.hi = sol.lo, sol.hi

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = self.sol(t)
        m = self.m
        return s.reshape(m, m) if t.ndim == 0 else s.T.reshape(-1, m, m)


def riccati_flow(profile, V0, interval, tol=DEFAULT_TOL, blowup=1e8):
    """Solve ``V' + V^2 + R = 0`` with ``V(0) = V0`` on ``interval``.

    Raises :class:`BlowUpError` carrying the time at which ``||V||``
    exceeds ``blowup``.
    """
    lo, hi = _check_interval(interval, tol)
    if not lo <= 0.0 <= hi:
        raise PreconditionError("interval must contain 0")
    m = profile.dim_normal
    V0 = np.atleast_2d(np.asarray(V0, float))
    if V0.shape != (m, m):
        raise PreconditionError(f"V0 must be {m}x{m}")
    if np.max(np.abs(V0 - V0.T)) > 1e-12 * (1 + np.abs(V0).max()):
        raise PreconditionError("V0 must be symmetric")
    rhs = _riccati_rhs(profile, m)

    def escape(t, y):
        return blowup - np.max(np.abs(y))

    escape.terminal = True
    pieces, grids = [], []
    for end in (lo, hi):
        if end == 0.0:
            continue
        try:
            res = integrate(rhs, 0.0, end, V0.ravel(), rtol=tol, atol=ATOL, events=escape)
        except IntegrationError as exc:
            raise BlowUpError(f"Riccati solution blew up near t = {exc.t:.6g}", exc.t) from None
        if res.t_events[0].size:
            tb = float(res.t_events[0][0])
            raise BlowUpError(f"Riccati solution blew up near t = {tb:.6g}", tb)
        pieces.append((min(0.0, end), max(0.0, end), res.sol))
        grids.append(res.t)
    dense = _RiccatiDense(PiecewiseSolution(pieces), m)
    grid = np.unique(np.concatenate(grids))
    V = dense(grid)
    h = 1e-3
    inner = grid[(grid > dense.lo + 2 * h) & (grid < dense.hi - 2 * h)]
    resid = 0.0
    if inner.size:
        Vi = dense(inner)
        dV = central_diff(dense, inner, h, order=4)
        resid = float(np.max(_norm2(dV + Vi @ Vi + profile.evaluate(inner))))
    asym = float(np.max(np.abs(V - np.swapaxes(V, 1, 2))))
    return RiccatiPath(grid, V, profile, resid, asym, dense)


def wronskian(Y1, Y2, t):
    """``W(Y1, Y2)(t) = Y1'^T Y2 - Y1^T Y2'``."""
    if not Y1.profile.same_geodesic(Y2.profile):
        raise ProfileMismatchError("Wronskian needs two tensors along the same geodesic")
    A, Ap = Y1.at(t)
    B, Bp = Y2.at(t)
    return np.swapaxes(Ap, -1, -2) @ B - np.swapaxes(A, -1, -2) @ Bp


# -- identities -----------------------------------------------------------------

@dataclass
class CentralIdentityReport:
    t: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    tail_bound: float
    T_tail: float

    @property
    def max_residuals(self):
        return {"c1": float(self.c1.max()), "c2": float(self.c2.max()), "c3": float(self.c3.max())}


def _inverse_gram_integral(S, a, b, panels_per_unit=1):
    """``int_a^b (S^T S)^{-1}(u) du`` by composite Gauss-Legendre."""
    n = max(2, int(math.ceil((b - a) * panels_per_unit)))
    nodes, weights = gauss_panels(a, b, n)
    Y = S(nodes)
    Yinv = np.linalg.inv(Y)
    G = Yinv @ np.swapaxes(Yinv, 1, 2)
    return np.einsum("k,kij->ij", weights, G)


def verify_central_identities(profile, r, t_grid, T_tail=30.0, tol=DEFAULT_TOL):
    """Residuals of the three flow identities linking ``S_{v,r}`` and ``U_v``.

    Each identity is checked against an independent computation of its
    left side on the shifted profile.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid <= 0) or np.any(t_grid >= r):
        raise PreconditionError("identity times must satisfy 0 < t < r")
    if not T_tail > 0:
        raise PreconditionError("T_tail must be positive")
    S = boundary_tensor_S(profile, r, tol, lo=-T_tail)
    tmax = float(t_grid.max())
    Uv = unstable_tensor(profile, tmax, tol=tol)
    U0, _ = unstable_limit(profile, tol_limit=1e-12, tol=tol)
    S0 = S.at(0.0)[1]
    W0 = U0 - S0
    # tail of the truncated integral, modelled as exponential decay
    g0 = _norm2(np.linalg.inv(S(-T_tail)) @ np.linalg.inv(S(-T_tail)).T)
    g1 = _norm2(np.linalg.inv(S(-T_tail + 1)) @ np.linalg.inv(S(-T_tail + 1)).T)
    tail = g0 / math.log(g1 / g0) if g1 > g0 else math.inf
    c1, c2, c3 = [], [], []
    for t in t_grid:
        shifted = shift_profile(profile, t)
        lhs1 = boundary_derivative_S(shifted, r - t, tol)
        St, Stp = S.at(t)
        Sinv = inv_checked(St, "S_{v,r}(t)")
        c1.append(_norm2(lhs1 - Stp @ Sinv))
        Ushift, _ = unstable_limit(shifted, tol_limit=1e-12, tol=tol)
        L = Ushift - lhs1
        Ut = Uv(t)
        P1 = np.linalg.inv(Ut).T @ W0 @ Sinv
        P2 = Sinv.T @ W0 @ np.linalg.inv(Ut)
        c2.append(max(_norm2(L - P1), _norm2(L - P2)))
        I = _inverse_gram_integral(S, -T_tail, t)
        P3 = Sinv.T @ np.linalg.inv(I) @ Sinv
        c3.append(_norm2(L - P3))
    return CentralIdentityReport(t_grid, np.array(c1), np.array(c2), np.array(c3), tail, T_tail)


def check_transform_identity(profile, t, x, n_y=41, tol=DEFAULT_TOL):
    """Max over ``y in [0, x]`` of
    ``||S_{phi^t v, x}(y) - S_{v, t+x}(y + t) S_{v, t+x}(t)^{-1}||``."""
    if not (t > 0 and x > 0):
        raise PreconditionError("t and x must be positive")
    lhs = boundary_tensor_S(shift_profile(profile, t), x, tol)
    full = boundary_tensor_S(profile, t + x, tol)
    ys = np.linspace(0.0, x, n_y)
    right = inv_checked(full(t), "S_{v,t+x}(t)")
    diff = lhs(ys) - full(ys + t) @ right
    return float(np.max(_norm2(diff)))


# -- a-priori bounds --------------------------------------------------------------

@dataclass
class BoundCheck:
    name: str
    holds: bool
    worst_margin: float
    details: dict


def riccati_bounds_check(profile, T=10.0, n=100, tol=DEFAULT_TOL, slack=1e-9):
    """``-sqrt(R0) <= A'(t) A(t)^{-1} <= sqrt(R0) coth(t sqrt(R0))`` on ``n`` points."""
    R0 = profile.curvature_bound
    A = a_tensor(profile, T, tol)
    ts = np.linspace(T / n, T, n)
    Y, Yp = A.at(ts)
    V = _sym(Yp @ np.linalg.inv(Y))
    ev = np.linalg.eigvalsh(V)
    lower = -math.sqrt(R0)
    upper = np.array([sqrt_coth(R0, t) for t in ts])
    m_lo = ev.min(axis=1) - lower
    m_hi = upper - ev.max(axis=1)
    worst = float(min(m_lo.min(), m_hi.min()))
    return BoundCheck(
        "riccati_envelope",
        worst >= -slack,
        worst,
        {"t": ts, "eig_min": ev.min(axis=1), "eig_max": ev.max(axis=1), "upper": upper},
    )


def boundary_norm_bound_check(profile, r0=2.0, T=2.0, r_list=(2.0, 4.0, 8.0, 16.0), n=50,
                              tol=DEFAULT_TOL):
    """``||S_{v,r}(t)|| <= C1(R0, r0, T)`` for ``r >= r0``, ``0 <= t <= T <= r0``."""
    if not (r0 > 1 and T <= r0):
        raise PreconditionError("need r0 > 1 and T <= r0")
    bound = C1(profile.curvature_bound, r0, T)
    worst = 0.0
    for r in r_list:
        if r < r0:
            continue
        S = boundary_tensor_S(profile, r, tol)
        worst = max(worst, float(np.max(_norm2(S(np.linspace(0, min(T, r), n))))))
    return BoundCheck("C1_bound", worst <= bound, bound - worst, {"C1": bound, "observed": worst})
