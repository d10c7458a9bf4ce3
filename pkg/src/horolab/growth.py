"""Volumes of geodesic spheres and balls, entropy and growth diagnostics.

``vol S_r(p)`` is the integral of ``det A_v(r)`` over the unit tangent
sphere at ``p``.  Homogeneous models need one profile times the area of
the unit sphere; surfaces use the periodic trapezoidal rule in the angle,
which converges spectrally, with the difference to the half-grid value as
error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotic import asymptotic_forms
from .errors import NumericalError, PreconditionError, QuadratureError
from .jacobi import a_tensor, boundary_derivative_S, stable_tensor, unstable_limit, unstable_tensor, _norm2
from .manifolds import SurfaceModel, sphere_area
from .ode import gauss_panels

R_CAP = 25.0


@dataclass
class VolumeCurve:
    p: tuple
    r: np.ndarray
    sphere_vol: np.ndarray
    ball_vol: np.ndarray
    log_sphere: np.ndarray
    quad_rule: str
    nodes: int
    quad_err: np.ndarray
    h_vol: float | None = None
    C: float | None = None

    def table(self, h=None):
        """Rows ``r, sphere_vol, ball_vol, ratio_e_hr, g_r, quad_err``."""
        ratio = self.sphere_vol * np.exp(-(h or 0.0) * self.r) if h is not None else np.full_like(self.r, np.nan)
        g = self.sphere_vol / self.ball_vol
        return np.column_stack([self.r, self.sphere_vol, self.ball_vol, ratio, g, self.quad_err])


def _log_det_A(profile, radii, tol=1e-11):
    """``log det A(r)`` and ``int_0^r det A`` at the given radii from one integration."""
    rmax = float(np.max(radii))
    A = a_tensor(profile, rmax, tol)
    Y = A(np.asarray(radii, dtype=float))
    sign, logdet = np.linalg.slogdet(Y)
    if np.any(sign <= 0):
        raise NumericalError("det A_v(r) is not positive (conjugate point?)")
    # ball: cumulative Gauss integral between consecutive radii
    edges = np.concatenate([[0.0], np.asarray(radii, dtype=float)])
    ball = np.zeros(len(radii))
    acc = 0.0
    for j in range(len(radii)):
        a, b = edges[j], edges[j + 1]
        if b > a:
            nodes, w = gauss_panels(a, b, max(1, int(math.ceil(b - a))))
            acc += float(np.sum(w * np.linalg.det(A(nodes))))
        ball[j] = acc
    return logdet, ball


def _check_radii(r_grid):
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))
    if np.any(r <= 0):
        raise PreconditionError("radii must be positive")
    if np.any(np.diff(r) <= 0):
        raise PreconditionError("radii must be increasing")
    if r.max() > R_CAP:
        raise PreconditionError(f"radii are capped at {R_CAP}")
    return r


def volume_curve(model, p=None, r_grid=(1.0, 2.0, 3.0), quad=64):
    """Sphere and ball volumes at every radius of ``r_grid``."""
    r = _check_radii(r_grid)
    n = model.dim_manifold
    if model.homogeneous:
        logdet, ball = _log_det_A(model.profile_at(), r)
        omega = sphere_area(n - 1)
        sphere = omega * np.exp(logdet)
        err = np.abs(sphere) * 1e-9
        return VolumeCurve(p, r, sphere, omega * ball, math.log(omega) + logdet,
                           "homogeneous", 1, err)
    if not isinstance(model, SurfaceModel):
        raise PreconditionError("unsupported model")
    if quad % 2 or quad < 8:
        raise PreconditionError("surface quadrature needs an even node count >= 8")
    p = model.default_point if p is None else tuple(p)
    thetas = 2 * math.pi * np.arange(quad) / quad
    dets, balls = [], []
    for th in thetas:
        ld, b = _log_det_A(model.profile_at(p, th), r)
        dets.append(np.exp(ld))
        balls.append(b)
    dets, balls = np.array(dets), np.array(balls)
    w = 2 * math.pi / quad
    sphere = w * dets.sum(axis=0)
    ball = w * balls.sum(axis=0)
    coarse = 2 * w * dets[::2].sum(axis=0)
    err = np.abs(sphere - coarse)
    return VolumeCurve(p, r, sphere, ball, np.log(sphere), "periodic_trapezoid", quad, err)


def sphere_volume(model, p=None, r=1.0, quad=64):
    c = volume_curve(model, p, [r], quad)
    return float(c.sphere_vol[0])


def ball_volume(model, p=None, r=1.0, quad=64):
    c = volume_curve(model, p, [r], quad)
    return float(c.ball_vol[0])


@dataclass
class EntropyEstimate:
    h_vol: float
    slope: float
    half_slopes: tuple
    limsup_slope: float
    sphere_slope: float
    subexponential: bool
    stability: float


def _lsq_slope(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    return float(coef[0]), float(np.sqrt(np.mean((y - fit) ** 2)))


def estimate_volume_entropy(curve, fit_window=(10.0, 20.0)):
    """Slope of ``log vol B_r`` over ``fit_window``.

    The limsup is realised as the largest slope over sliding sub-windows.
    Growth is declared sub-exponential (``h_vol = 0``) when ``log vol B_r``
    is fitted better by a line in ``log r`` than by a line in ``r``.
    """
    lo, hi = fit_window
    mask = (curve.r >= lo - 1e-12) & (curve.r <= hi + 1e-12)
    if mask.sum() < 5:
        raise PreconditionError("fit window must contain at least 5 radii")
    if np.any(curve.ball_vol[mask] <= 0):
        raise NumericalError("non-positive volumes")
    r = curve.r[mask]
    lb = np.log(curve.ball_vol[mask])
    slope, res_lin = _lsq_slope(r, lb)
    _, res_log = _lsq_slope(np.log(r), lb)
    k = len(r) // 2
    halves = (_lsq_slope(r[: k + 1], lb[: k + 1])[0], _lsq_slope(r[k:], lb[k:])[0])
    width = max(5, len(r) // 2)
    subs = [_lsq_slope(r[i:i + width], lb[i:i + width])[0] for i in range(len(r) - width + 1)]
    sphere_slope = _lsq_slope(r, curve.log_sphere[mask])[0]
    subexp = res_log < res_lin
    h = 0.0 if subexp else float(max(subs))
    return EntropyEstimate(h, slope, halves, float(max(subs)), sphere_slope, bool(subexp),
                           abs(halves[1] - halves[0]))


@dataclass
class PurelyExponentialReport:
    C: float
    ratio_min: float
    ratio_max: float
    r_min: float
    r_max: float


def check_purely_exponential(curve, h, r_min=1.0):
    """Smallest ``C`` with ``e^{hr}/C <= vol B_r <= C e^{hr}`` on the grid (``r >= r_min``)."""
    if not h > 0:
        raise PreconditionError("purely exponential growth needs h > 0")
    mask = curve.r >= r_min
    ratio = curve.ball_vol[mask] * np.exp(-h * curve.r[mask])
    rs = curve.r[mask]
    C = float(max(ratio.max(), 1.0 / ratio.min()))
    return PurelyExponentialReport(C, float(ratio.min()), float(ratio.max()),
                                   float(rs[ratio.argmin()]), float(rs[ratio.argmax()]))


def _direction_nodes(model, p, quad):
    if model.homogeneous:
        return [model.profile_at()], sphere_area(model.dim_manifold - 1) * np.ones(1)
    p = model.default_point if p is None else tuple(p)
    thetas = 2 * math.pi * np.arange(quad) / quad
    return [model.profile_at(p, th) for th in thetas], np.full(quad, 2 * math.pi / quad)


@dataclass
class LowerBoundReport:
    r: np.ndarray
    direct: np.ndarray
    integrand: np.ndarray
    relative_gap: np.ndarray
    h: float
    harmonic: bool
    nondecreasing: bool
    C1: float


def lower_bound_ratio(model, p=None, r_list=(1.0, 2.0, 4.0, 8.0), quad=32, ah_tol=1e-6):
    """``vol S_r / e^{hr}`` two ways: quadrature of ``det A_v(r)`` and of
    ``1 / det(U(v) - S'_{v,r}(0))``.  They agree on asymptotically harmonic
    models, where ``det A_v(r) e^{-hr}`` is exactly the second integrand."""
    r = _check_radii(r_list)
    profiles, w = _direction_nodes(model, p, quad)
    Us = [unstable_limit(pr, tol_limit=1e-12)[0] for pr in profiles]
    traces = np.array([np.trace(U) for U in Us])
    h = float(traces.mean())
    harmonic = float(np.max(np.abs(traces - h))) < ah_tol
    direct = np.zeros(len(r))
    second = np.zeros(len(r))
    for pr, U, wi in zip(profiles, Us, w):
        logdet, _ = _log_det_A(pr, r)
        direct += wi * np.exp(logdet - h * r)
        for j, rj in enumerate(r):
            second[j] += wi / np.linalg.det(U - boundary_derivative_S(pr, rj))
    gap = np.abs(direct - second) / np.abs(second)
    return LowerBoundReport(r, direct, second, gap, h, harmonic,
                            bool(np.all(np.diff(second) >= -1e-12 * np.abs(second[1:]))),
                            float(second[-1]))


def horosphere_ball_volume(model, rho):
    """Intrinsic volume of ``{b_v = 0} ∩ B_rho(p)`` for real hyperbolic space.

    The horosphere is flat and a point at horospherical distance ``s`` lies
    at distance ``2 asinh(s / 2)``; the region is a flat ``(n-1)``-ball of
    radius ``2 sinh(rho / 2)``.
    """
    n = model.dim_manifold
    R = model.profile_at().evaluate(0.0)
    if not (model.homogeneous and model.profile_at().is_constant and np.allclose(R, -np.eye(n - 1))):
        raise PreconditionError("closed-form horosphere volume needs curvature -1")
    k = n - 1
    radius = 2 * math.sinh(rho / 2)
    return sphere_area(k - 1) / k * radius**k if k > 1 else 2 * radius


def horoball_slab_volume(model, v=None, rho=1.0, r=1.0, vol0=None):
    """``int_{-rho/2}^{r} e^{hs} ds * vol0`` with ``vol0 = vol(b_v^{-1}(0) ∩ B_rho)``.

    ``vol0`` is computed for curvature -1 models, traced along the
    horocycle on surfaces (``v = (p, theta)``), or passed explicitly.
    """
    if r <= -rho / 2:
        return 0.0
    if vol0 is None:
        if model.homogeneous:
            vol0 = horosphere_ball_volume(model, rho)
        else:
            from .horocycles import horocycle_arc_within

            if v is None:
                v = (model.default_point, math.pi / 2)
            vol0 = horocycle_arc_within(model.surface, v, rho)
    if model.homogeneous:
        h = asymptotic_forms(model.profile_at()).h
    else:
        p, th = v if v is not None else (model.default_point, math.pi / 2)
        h = float(np.trace(unstable_limit(model.profile_at(p, th))[0]))
    if h < 1e-12:
        return (r + rho / 2) * vol0
    return (math.exp(h * r) - math.exp(-h * rho / 2)) / h * vol0


@dataclass
class CheegerReport:
    r: np.ndarray
    g: np.ndarray
    limit: float
    h: float
    error: float
    above: bool


def cheeger_limit(model, p=None, r_max=15.0, quad=64, n=None, h=None, tol=1e-3):
    """``g(r) = vol S_r / vol B_r`` up to ``r_max`` and its limit.

    The limit estimate is Aitken's extrapolation of the last three samples
    when it is stable, else ``g(r_max)``.
    """
    n = n or int(round(r_max)) + 1
    r = np.linspace(r_max / n, r_max, n)
    curve = volume_curve(model, p, r, quad)
    g = curve.sphere_vol / curve.ball_vol
    if h is None:
        if model.homogeneous:
            h = asymptotic_forms(model.profile_at()).h
        else:
            pp = model.default_point if p is None else p
            h = float(np.trace(unstable_limit(model.profile_at(pp, 0.0))[0]))
    limit = float(g[-1])
    d1, d2 = g[-1] - g[-2], g[-2] - g[-3]
    if abs(d2 - d1) > 0 and abs(d1) < abs(d2):
        aitken = g[-1] - d1 * d1 / (d1 - d2)
        if abs(aitken - g[-1]) < abs(d1):
            limit = float(aitken)
    large = r >= 0.5 * r_max
    return CheegerReport(r, g, limit, h, abs(g[-1] - h), bool(np.all(g[large] >= h * (1 - tol))))


@dataclass
class BoundedAsymptoteReport:
    A_emp: float
    U_min: float
    unstable_ok: bool
    r: np.ndarray
    ratio: np.ndarray
    bound: np.ndarray
    volume_ok: bool
    verdict: bool


def bounded_asymptote_check(model, sample=None, T=20.0, r_list=None, quad=32, n_t=201):
    """Empirical ``A = sup ||S_v(t)||`` over the sample and ``t in [0, T]``,
    ``||U_v(t)|| >= 1/A`` and ``vol S_r / e^{hr} <= omega_{n-1} A^{2n-2} r^{n-1}``.

    ``||U_v(t)||`` is checked through its smallest singular value, which is
    the form that makes the inequality informative for ``m > 1``.
    """
    if sample is None:
        sample = model.sample_directions(1 if model.homogeneous else 8)
    ts = np.linspace(0.0, T, n_t)
    A_emp, U_min = 0.0, math.inf
    hs = []
    for p, d in sample:
        prof = model.profile_at(p, d)
        S = stable_tensor(prof, T)
        A_emp = max(A_emp, float(np.max(_norm2(S(ts)))))
        U = unstable_tensor(prof, T)
        U_min = min(U_min, float(np.min(np.linalg.svd(U(ts), compute_uv=False)[:, -1])))
        hs.append(float(np.trace(unstable_limit(prof)[0])))
    n = model.dim_manifold
    r = np.asarray(r_list if r_list is not None else np.arange(1.0, 21.0), dtype=float)
    curve = volume_curve(model, None, r, quad)
    h = float(np.mean(hs))
    ratio = curve.sphere_vol * np.exp(-h * r)
    bound = sphere_area(n - 1) * A_emp ** (2 * n - 2) * r ** (n - 1)
    unstable_ok = U_min >= 1.0 / A_emp - 1e-9
    volume_ok = bool(np.all(ratio <= bound))
    return BoundedAsymptoteReport(A_emp, U_min, unstable_ok, r, ratio, bound, volume_ok,
                                  unstable_ok and volume_ok)


@dataclass
class RankDetection:
    r: np.ndarray
    min_det: np.ndarray
    rank_one: bool
    threshold: float


def rank_detection_from_growth(model, p=None, r_list=(4.0, 8.0, 16.0), quad=16, threshold=1e-3):
    """Rank-one verdict from ``min_v det(U(v) - S'_{v,r}(0))`` under ``r`` doubling."""
    r = np.asarray(r_list, dtype=float)
    profiles, _ = _direction_nodes(model, p, quad)
    mins = np.full(len(r), math.inf)
    for pr in profiles:
        U = unstable_limit(pr, tol_limit=1e-12)[0]
        for j, rj in enumerate(r):
            mins[j] = min(mins[j], float(np.linalg.det(U - boundary_derivative_S(pr, rj))))
    stable = mins[-1] >= 0.9 * mins[-2] if len(r) > 1 else True
    return RankDetection(r, mins, bool(mins[-1] > threshold and stable), threshold)
