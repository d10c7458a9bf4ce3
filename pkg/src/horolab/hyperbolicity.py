"""Anosov exponents, divergence of geodesics and thin-triangle estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PreconditionError, ShootingError
from .jacobi import a_tensor
from .manifolds import HomogeneousModel, SurfaceModel
from .ode import gauss_panels
from .surfaces import shoot, surface_geodesic

ANOSOV_THRESHOLD = 0.05


@dataclass
class GrowthFit:
    alpha: float
    c: float
    intercept: float
    model: str
    linear_slope: float
    residual: float
    power_residual: float


def fit_growth(t, log_y):
    """Rate ``alpha`` of ``log y`` on ``t``.

    Exponential (``a + alpha t``) and polynomial (``a + k log t``) fits
    are compared; the polynomial one wins when its residual is smaller,
    and then ``alpha = 0``.  ``c`` is the largest constant with
    ``c e^{alpha t} <= y`` on the grid, ``intercept`` the fitted one.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(log_y, dtype=float)
    lin = np.polyfit(t, y, 1)
    pw = np.polyfit(np.log(t), y, 1)
    res_lin = float(np.sqrt(np.mean((y - np.polyval(lin, t)) ** 2)))
    res_pw = float(np.sqrt(np.mean((y - np.polyval(pw, np.log(t))) ** 2)))
    if res_pw < res_lin or lin[0] < 0:
        alpha, intercept, model = 0.0, float(np.min(y)), "polynomial"
    else:
        alpha, intercept, model = float(lin[0]), float(lin[1]), "exponential"
    c = float(np.exp(np.min(y - alpha * t)))
    return GrowthFit(alpha, c, float(math.exp(intercept)), model, float(lin[0]), res_lin, res_pw)


@dataclass
class AnosovReport:
    alpha: float
    c: float
    anosov: bool
    per_direction: list
    threshold: float
    T_fit: float


def _min_singular_log(profile, ts):
    A = a_tensor(profile, float(ts[-1]))
    sv = np.linalg.svd(A(ts), compute_uv=False)[:, -1]
    return np.log(sv)


def anosov_exponent(model, sample=None, T_fit=20.0, n=96, threshold=ANOSOV_THRESHOLD, seed=0):
    """Growth rate of the smallest singular value of ``A_v(t)`` on ``[1, T_fit]``.

    ``alpha`` and ``c`` are taken from the direction with the smallest fitted
    rate.  ``model`` may also be a bare curvature profile.
    """
    if T_fit < 5:
        raise PreconditionError("T_fit must be at least 5")
    if not hasattr(model, "profile_at"):
        model = HomogeneousModel(model)
    if sample is None:
        sample = model.sample_directions(1 if model.homogeneous else 8, seed)
    ts = np.linspace(1.0, T_fit, n)
    fits = [fit_growth(ts, _min_singular_log(model.profile_at(p, d), ts)) for p, d in sample]
    worst = min(fits, key=lambda f: f.alpha)
    return AnosovReport(worst.alpha, worst.c, worst.alpha > threshold, fits, threshold, T_fit)


@dataclass
class DivergenceReport:
    t: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    angle: float
    alpha: float
    c: float
    alpha_low: float
    alpha_up: float
    liminf: float
    c0_empirical: float
    bracket_ok: bool
    rates_ordered: bool
    exponential: bool

    def table(self):
        return np.column_stack([self.t, self.lower, self.upper,
                                np.log(self.lower) / self.t, np.log(self.upper) / self.t])


def _angle_between(v1, v2):
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    c = float(np.dot(v1, v2) / (np.linalg.norm(v1) * np.linalg.norm(v2)))
    return math.acos(max(-1.0, min(1.0, c)))


def divergence_bounds(model, p=None, v1=None, v2=None, T=20.0, n=96, eigen_index=0, s_nodes=16):
    """Bracket the outside-ball distance ``d_t`` between ``c_{v1}(t)`` and ``c_{v2}(t)``.

    ``upper(t)`` is the length of the arc ``s -> c_{v(s)}(t)`` on the
    geodesic sphere, ``int ||A_{v(s)}(t) v'(s)|| ds``.  ``lower(t)`` is
    ``c e^{alpha t}`` times the angle, with ``alpha`` and ``c`` from
    :func:`anosov_exponent`.

    Surfaces take ``v1, v2`` as angles at ``p``.  Homogeneous models take
    vectors and rotate in a plane whose tangent ``v'`` is the normal
    eigendirection ``eigen_index`` of the profile.
    """
    ts = np.linspace(1.0, T, n)
    if isinstance(model, SurfaceModel):
        p = model.default_point if p is None else tuple(p)
        th1, th2 = float(v1), float(v2)
        angle = abs(th2 - th1)
        if angle < 1e-6:
            raise PreconditionError("directions must differ by at least 1e-6")
        if abs(angle - math.pi) < 1e-6:
            raise PreconditionError("antipodal directions are not joined by a unique arc")
        nodes, w = gauss_panels(min(th1, th2), max(th1, th2), max(1, s_nodes // 16), order=16)
        upper = np.zeros(n)
        sample = []
        for s, ws in zip(nodes, w):
            prof = model.profile_at(p, float(s))
            A = a_tensor(prof, T)
            upper += ws * np.abs(A(ts)[:, 0, 0])
            sample.append((p, float(s)))
    else:
        if not model.homogeneous:
            raise PreconditionError("unsupported model")
        angle = _angle_between(v1, v2)
        if angle < 1e-6:
            raise PreconditionError("directions must differ by at least 1e-6")
        if abs(angle - math.pi) < 1e-6:
            raise PreconditionError("antipodal directions are not joined by a unique arc")
        prof = model.profile_at()
        A = a_tensor(prof, T)
        upper = angle * np.linalg.norm(A(ts)[:, :, eigen_index], axis=1)
        sample = [(None, v1)]
    ano = anosov_exponent(model, sample, T_fit=T, n=n)
    lower = ano.c * np.exp(ano.alpha * ts) * angle
    low_fit = fit_growth(ts, np.log(lower))
    up_fit = fit_growth(ts, np.log(upper))
    half = ts >= 0.5 * T
    liminf = float(np.min(np.log(lower[half]) / ts[half]))
    c0 = liminf / ano.alpha if ano.alpha > 0 else 0.0
    return DivergenceReport(
        t=ts,
        lower=lower,
        upper=upper,
        angle=angle,
        alpha=ano.alpha,
        c=ano.c,
        alpha_low=low_fit.alpha,
        alpha_up=up_fit.alpha,
        liminf=liminf,
        c0_empirical=c0,
        bracket_ok=bool(np.all(lower <= upper * (1 + 1e-9))),
        rates_ordered=low_fit.alpha <= up_fit.alpha + 1e-9,
        exponential=ano.anosov,
    )


# -- thin triangles -------------------------------------------------------------

def _endpoint(surface, p, theta, length):
    path, _ = surface_geodesic(surface, p, theta, T=max(length, 1e-3) + 1.0)
    x, y = path.point(length)
    return float(x), float(y)


def sample_triangles(surface, centre, n=30, radius=3.0, seed=0):
    """``n`` triangles with vertices in the metric ball of ``radius`` about ``centre``.

    Vertices have uniform angle and distance ``radius * sqrt(U)``, which is
    uniform in area for a flat disc.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        tri = []
        for _ in range(3):
            th = rng.uniform(0.0, 2 * math.pi)
            d = radius * math.sqrt(rng.uniform(0.0, 1.0))
            tri.append(_endpoint(surface, centre, th, d))
        out.append(tuple(tri))
    return out


class _Side:
    def __init__(self, surface, a, b, tol):
        res = shoot(surface, a, b, tol=tol, rtol=1e-10)
        self.length = res.distance
        self.path, _ = surface_geodesic(surface, a, res.theta, T=self.length + 1.0, tol=1e-10)

    def point(self, u):
        x, y = self.path.point(u)
        return float(x), float(y)


def _distance_to_side(surface, q, side, tol, xatol):
    guess = [None]

    def d(u):
        res = shoot(surface, q, side.point(u), tol=tol, rtol=1e-10, theta_guess=guess[0],
                    guess_width=0.2)
        guess[0] = res.theta
        return res.distance

    ends = min(d(0.0), d(side.length))
    opt = minimize_scalar(d, bounds=(0.0, side.length), method="bounded",
                          options={"xatol": xatol})
    return min(ends, float(opt.fun))


@dataclass
class ThinTriangleReport:
    delta: float
    per_triangle: np.ndarray
    n_triangles: int
    n_skipped: int
    probes_per_side: int
    max_diameter: float


def thin_triangle_delta(surface, triangle_sample=None, tol=1e-6, probes=20, n=30, radius=3.0,
                        centre=None, seed=0, xatol=1e-4):
    """Largest distance from a point on a triangle side to the union of the other two.

    ``triangle_sample`` is a list of vertex triples (default: ``n`` random
    triangles in the ball of ``radius`` about ``centre``).  Triangles whose
    sides fail to shoot are skipped and counted.
    """
    if not surface.strictly_negative:
        raise PreconditionError("thin triangle estimate needs strictly negative curvature")
    if centre is None:
        centre = (0.0, 1.0) if surface.chart == "halfplane" else (0.0, 0.0)
    if triangle_sample is None:
        triangle_sample = sample_triangles(surface, centre, n, radius, seed)
    deltas, skipped, diam = [], 0, 0.0
    for tri in triangle_sample:
        try:
            sides = [_Side(surface, tri[i], tri[(i + 1) % 3], tol) for i in range(3)]
            best = 0.0
            for i, side in enumerate(sides):
                others = [sides[(i + 1) % 3], sides[(i + 2) % 3]]
                for u in np.linspace(0.0, side.length, probes + 2)[1:-1]:
                    q = side.point(u)
                    dist = _distance_to_side(surface, q, others[0], tol, xatol)
                    if dist > best:
                        dist = min(dist, _distance_to_side(surface, q, others[1], tol, xatol))
                    best = max(best, dist)
            deltas.append(best)
            diam = max(diam, max(s.length for s in sides))
        except ShootingError:
            skipped += 1
    if not deltas:
        raise ShootingError("every sampled triangle failed to shoot")
    deltas = np.array(deltas)
    return ThinTriangleReport(float(deltas.max()), deltas, len(deltas), skipped, probes, diam)
