"""Conformal surfaces ``e^{2 phi} (dx^2 + dy^2)``.

Conformal factors come from a small set of named families.  Each family is
a sympy expression, so the derivatives up to third order needed for the
curvature gradient are exact symbolic derivatives, compiled once with
``lambdify``.

Geodesics are integrated in the state ``(x, y, theta)`` where ``theta`` is
the chart angle of the velocity; unit speed is then built in:
``(x', y') = e^{-phi} (cos theta, sin theta)`` and
``theta' = e^{-phi} (phi_y cos theta - phi_x sin theta)``.
On half-plane charts the state is ``(x / y, log y, theta)``; both
coordinates then change at unit rate in metric terms, which keeps error
control meaningful far from the base point.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.optimize import brentq

from .errors import ConfigError, PreconditionError, ShootingError
from .models import CurvatureProfile
from .ode import PiecewiseSolution, integrate

_X, _Y = sp.symbols("x y", real=True)
_DERIVS = ("x", "y", "xx", "xy", "yy", "xxx", "xxy", "xyy", "yyy")


def _phi_expression(family, params):
    x, y = _X, _Y
    if family == "constant":
        return sp.Float(params.get("value", 0.0)) + 0 * x, "plane"
    if family == "log_conformal":
        return -sp.log(y) + sp.Float(params.get("shift", 0.0)), "halfplane"
    if family == "tanh_poly":
        coeffs = params.get("coefficients")
        if not coeffs:
            raise ConfigError("tanh_poly surface needs coefficients")
        # w = tanh of the signed hyperbolic distance to the imaginary axis
        w = x / sp.sqrt(x**2 + y**2)
        return -sp.log(y) + sum(sp.Float(c) * w**k for k, c in enumerate(coeffs)), "halfplane"
    if family == "sinusoidal":
        a = sp.Float(params.get("amplitude", 0.1))
        kx = sp.Float(params.get("kx", 1.0))
        ky = sp.Float(params.get("ky", 1.0))
        px = sp.Float(params.get("px", 0.0))
        py = sp.Float(params.get("py", 0.0))
        return a * sp.sin(kx * x + px) * sp.sin(ky * y + py), "plane"
    raise ConfigError(f"unknown conformal family {family!r}")


@lru_cache(maxsize=64)
def _compiled(family, frozen_params):
    params = dict(frozen_params)
    if "coefficients" in params:
        params["coefficients"] = list(params["coefficients"])
    phi, chart = _phi_expression(family, params)
    exprs = {"": phi}
    for d in _DERIVS:
        exprs[d] = sp.diff(phi, *[{"x": _X, "y": _Y}[c] for c in d])
    fns = {k: sp.lambdify((_X, _Y), v, modules="numpy") for k, v in exprs.items()}
    geo = sp.lambdify((_X, _Y), (sp.exp(-phi), exprs["x"], exprs["y"]), modules="numpy", cse=True)
    return chart, fns, geo


def _freeze(params):
    out = []
    for k, v in sorted(params.items()):
        out.append((k, tuple(v) if isinstance(v, (list, tuple)) else v))
    return tuple(out)


class ConformalSurface:
    """A complete surface with metric ``e^{2 phi}(dx^2 + dy^2)``.

    Parameters
    ----------
    family : str
        ``constant``, ``log_conformal``, ``tanh_poly`` or ``sinusoidal``.
    params : dict
        Family parameters (see :func:`surface_from_spec`).
    """

    def __init__(self, family, params=None):
        self.family = family
        self.params = dict(params or {})
        self.chart, self._fns, self._geo = _compiled(family, _freeze(self.params))
        self._range = None

    def __repr__(self):
        return f"ConformalSurface({self.family!r}, {self.params!r})"

    @property
    def key(self):
        return (self.family, _freeze(self.params))

    # -- conformal factor and its derivatives ---------------------------------
    def phi(self, x, y, d=""):
        val = self._fns[d](x, y)
        return np.broadcast_to(val, np.broadcast(np.asarray(x), np.asarray(y)).shape) * 1.0

    def in_domain(self, p):
        return self.chart == "plane" or p[1] > 0

    def curvature(self, x, y):
        lap = self.phi(x, y, "xx") + self.phi(x, y, "yy")
        return -np.exp(-2 * self.phi(x, y)) * lap

    def curvature_grad(self, x, y):
        """Chart partials ``(K_x, K_y)`` from third derivatives of ``phi``."""
        e = np.exp(-2 * self.phi(x, y))
        lap = self.phi(x, y, "xx") + self.phi(x, y, "yy")
        lap_x = self.phi(x, y, "xxx") + self.phi(x, y, "xyy")
        lap_y = self.phi(x, y, "xxy") + self.phi(x, y, "yyy")
        kx = -e * (lap_x - 2 * self.phi(x, y, "x") * lap)
        ky = -e * (lap_y - 2 * self.phi(x, y, "y") * lap)
        return kx, ky

    def curvature_fd(self, x, y, h=1e-3):
        """Curvature from a 5-point finite-difference Laplacian of ``phi``."""
        f = self.phi
        def d2(dx, dy):
            return (-f(x + 2 * dx, y + 2 * dy) + 16 * f(x + dx, y + dy) - 30 * f(x, y)
                    + 16 * f(x - dx, y - dy) - f(x - 2 * dx, y - 2 * dy)) / (12 * h * h)
        hx = h * (abs(y) if self.chart == "halfplane" else 1.0)
        lap = d2(hx, 0.0) * (h * h) / (hx * hx) + d2(0.0, hx) * (h * h) / (hx * hx)
        return -np.exp(-2 * f(x, y)) * lap

    def metric_norm(self, x, y, vx, vy):
        return np.exp(self.phi(x, y)) * np.hypot(vx, vy)

    def _range_samples(self):
        if self.chart == "halfplane":
            # the half-plane families are dilation invariant: the unit
            # semicircle meets every orbit
            a = np.linspace(1e-4, math.pi - 1e-4, 4001)
            return np.cos(a), np.sin(a)
        if self.family == "sinusoidal":
            kx = float(self.params.get("kx", 1.0))
            ky = float(self.params.get("ky", 1.0))
            gx, gy = np.meshgrid(np.linspace(0, 2 * math.pi / kx, 201),
                                 np.linspace(0, 2 * math.pi / ky, 201))
            return gx.ravel(), gy.ravel()
        return np.zeros(1), np.zeros(1)

    def _stats(self):
        if self._range is None:
            x, y = self._range_samples()
            k = self.curvature(x, y)
            kx, ky = self.curvature_grad(x, y)
            grad = np.exp(-self.phi(x, y)) * np.hypot(kx, ky)
            self._range = (float(k.min()), float(k.max()), float(grad.max()))
        return self._range

    @property
    def curvature_range(self):
        """``(K_min, K_max)`` over the surface."""
        lo, hi, _ = self._stats()
        return lo, hi

    @property
    def curvature_bound(self):
        lo, hi = self.curvature_range
        return max(abs(lo), abs(hi))

    @property
    def curvature_derivative_bound(self):
        """``R0'`` with ``||grad K||_g <= R0'``."""
        return self._stats()[2]

    @property
    def strictly_negative(self):
        return self.curvature_range[1] < 0

    # -- geodesic flow --------------------------------------------------------
    def _to_state(self, p, theta):
        x, y = float(p[0]), float(p[1])
        if self.chart == "halfplane":
            if y <= 0:
                raise PreconditionError(f"point {p} outside the upper half-plane")
            return np.array([x / y, math.log(y), float(theta)])
        return np.array([x, y, float(theta)])

    def _chart_xy(self, s0, s1):
        if self.chart == "halfplane":
            y = np.exp(s1)
            return s0 * y, y
        return s0, s1

    def _rhs(self, t, s):
        s0, s1, th = s
        c, sn = math.cos(th), math.sin(th)
        if self.chart == "halfplane":
            y = math.exp(s1)
            em, px, py = self._geo(s0 * y, y)
            ey = em / y
            return [ey * (c - s0 * sn), ey * sn, em * (py * c - px * sn)]
        em, px, py = self._geo(s0, s1)
        return [em * c, em * sn, em * (py * c - px * sn)]


def pinched_surface(k_axis=-1.0, k_far=-1.5):
    """Half-plane surface whose curvature is ``k_axis`` on the imaginary axis
    and tends to ``k_far`` away from it (monotone in between for the
    default values).

    The conformal factor is ``-log y + c0 + c2 w^2`` with
    ``w = x / |z|``; the curvature is then
    ``-exp(-2 c0 - 2 c2 w^2) (1 + 2 c2 s (2 s - 1))`` with ``s = 1 - w^2``.
    """
    ratio = k_far / k_axis
    if not (k_axis < 0 and k_far < 0):
        raise ConfigError("pinched surface needs negative curvature values")
    c2 = brentq(lambda c: (1 + 2 * c) * math.exp(2 * c) * ratio - 1.0, -0.24, 0.24, xtol=1e-15)
    c0 = -0.5 * math.log(-k_axis / (1 + 2 * c2))
    return ConformalSurface("tanh_poly", {"coefficients": [c0, 0.0, c2]})


def hyperbolic_plane():
    return ConformalSurface("log_conformal", {"shift": 0.0})


def flat_plane():
    return ConformalSurface("constant", {"value": 0.0})


def surface_from_spec(spec):
    """``{"kind": "surface", "phi": {"family": ..., ...}}`` -> surface.

    The shortcut family ``pinched`` expands to :func:`pinched_surface`.
    """
    if not isinstance(spec, dict) or spec.get("kind") != "surface":
        raise ConfigError("surface model must have kind 'surface'")
    phi = spec.get("phi")
    if not isinstance(phi, dict) or "family" not in phi:
        raise ConfigError("surface model needs a phi object with a family")
    params = {k: v for k, v in phi.items() if k != "family"}
    if phi["family"] == "pinched":
        return pinched_surface(params.get("k_axis", -1.0), params.get("k_far", -1.5))
    return ConformalSurface(phi["family"], params)


# -- geodesics ----------------------------------------------------------------

@dataclass
class GeodesicPath:
    """Unit-speed geodesic on a conformal surface with dense output."""

    surface: ConformalSurface
    footpoint: tuple
    theta: float
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xdot: np.ndarray
    ydot: np.ndarray
    _dense: object = field(repr=False, default=None)

    @property
    def unit_speed(self):
        speed = self.surface.metric_norm(self.x, self.y, self.xdot, self.ydot)
        return bool(np.max(np.abs(speed - 1.0)) < 1e-8)

    def state(self, t):
        s = self._dense(t)
        x, y = self.surface._chart_xy(s[0], s[1])
        return x, y, s[2]

    def point(self, t):
        x, y, _ = self.state(t)
        return x, y

    def velocity(self, t):
        x, y, th = self.state(t)
        em = np.exp(-self.surface.phi(x, y))
        return em * np.cos(th), em * np.sin(th)

    def normal(self, t):
        """Chart components of the unit left normal."""
        x, y, th = self.state(t)
        em = np.exp(-self.surface.phi(x, y))
        return -em * np.sin(th), em * np.cos(th)

    def geodesic_residual(self, h=1e-4):
        """Max deviation of the chart acceleration from the Christoffel form."""
        lo, hi = self.t[0] + 2 * h, self.t[-1] - 2 * h
        ts = self.t[(self.t > lo) & (self.t < hi)]
        if ts.size == 0:
            return 0.0
        ax = (self.velocity(ts + h)[0] - self.velocity(ts - h)[0]) / (2 * h)
        ay = (self.velocity(ts + h)[1] - self.velocity(ts - h)[1]) / (2 * h)
        x, y = self.point(ts)
        vx, vy = self.velocity(ts)
        fx, fy = self.surface.phi(x, y, "x"), self.surface.phi(x, y, "y")
        ex = -fx * (vx**2 - vy**2) - 2 * fy * vx * vy
        ey = fy * (vx**2 - vy**2) - 2 * fx * vx * vy
        scale = np.exp(self.surface.phi(x, y))
        return float(np.max(scale * np.hypot(ax - ex, ay - ey)))


class _GeodesicFlow:
    """Geodesic through ``(p, theta)`` integrated on demand in both directions."""

    def __init__(self, surface, p, theta, T, rtol):
        self.surface = surface
        self.p = (float(p[0]), float(p[1]))
        self.theta = float(theta)
        self.rtol = rtol
        self._lock = threading.Lock()
        self._fwd, self._bwd = [], []
        s0 = surface._to_state(self.p, self.theta)
        self._fwd_end = (0.0, s0)
        self._bwd_end = (0.0, s0)
        self._dense = None
        self.ensure(-T, T)

    def _extend(self, direction, target):
        end_t, end_s = self._fwd_end if direction > 0 else self._bwd_end
        res = integrate(self.surface._rhs, end_t, target, end_s, rtol=self.rtol, atol=1e-14)
        piece = (min(end_t, target), max(end_t, target), res.sol)
        if direction > 0:
            self._fwd.append(piece)
            self._fwd_end = (target, res.y[:, -1])
        else:
            self._bwd.append(piece)
            self._bwd_end = (target, res.y[:, -1])
        return res

    def ensure(self, lo, hi):
        with self._lock:
            changed = False
            if hi > self._fwd_end[0]:
                self._extend(+1, max(hi, 1.5 * self._fwd_end[0]))
                changed = True
            if lo < self._bwd_end[0]:
                self._extend(-1, min(lo, 1.5 * self._bwd_end[0]))
                changed = True
            if changed or self._dense is None:
                self._dense = PiecewiseSolution(self._bwd + self._fwd)
            return self._dense

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        dense = self._dense
        tmin, tmax = float(np.min(t)), float(np.max(t))
        if tmin < dense.lo or tmax > dense.hi:
            dense = self.ensure(tmin, tmax)
        return dense(t)

    def grid(self):
        ts = [np.asarray(sol.ts) for _, _, sol in self._bwd + self._fwd]
        return np.unique(np.concatenate(ts))


class _CurvatureAlong:
    """Profile base ``t -> K(c(t))`` as a ``(..., 1, 1)`` array."""

    def __init__(self, flow):
        self.flow = flow

    def __call__(self, t):
        s = self.flow(t)
        x, y = self.flow.surface._chart_xy(s[0], s[1])
        k = self.flow.surface.curvature(x, y)
        return np.asarray(k, dtype=float)[..., None, None]


def surface_geodesic(surface, p, theta, T=40.0, tol=1e-11):
    """Unit-speed geodesic through ``p`` at chart angle ``theta``.

    Returns ``(GeodesicPath, CurvatureProfile)``.  The path covers
    ``[-T, T]``; the profile extends the integration on demand when asked
    for curvature beyond that window.
    """
    if not T > 0 or not tol > 0:
        raise PreconditionError("T and tol must be positive")
    flow = _GeodesicFlow(surface, p, theta, T, tol)
    dense = flow.ensure(-T, T)
    ts = flow.grid()
    ts = ts[(ts >= -T) & (ts <= T)]
    s = dense(ts)
    x, y = surface._chart_xy(s[0], s[1])
    em = np.exp(-surface.phi(x, y))
    path = GeodesicPath(
        surface=surface,
        footpoint=flow.p,
        theta=flow.theta,
        t=ts,
        x=x,
        y=y,
        xdot=em * np.cos(s[2]),
        ydot=em * np.sin(s[2]),
        _dense=flow,
    )
    lo, hi = surface.curvature_range
    profile = CurvatureProfile(
        dim_normal=1,
        curvature_bound=max(abs(lo), abs(hi)),
        kind="surface_borne",
        base=_CurvatureAlong(flow),
        flags=("conjugate-point risk",) if hi > 0 else (),
        descriptor=("surface", surface.key, flow.p, flow.theta),
    )
    return path, profile


# -- two-point problem --------------------------------------------------------

@dataclass
class ShootResult:
    distance: float
    theta: float
    miss: float
    evaluations: int


def _h2_direction(p, q):
    """Initial chart angle of the hyperbolic geodesic from ``p`` to ``q``."""
    (px, py), (qx, qy) = p, q
    if abs(qx - px) < 1e-14 * (1 + abs(px)):
        return math.pi / 2 if qy > py else -math.pi / 2
    xc = ((qx * qx + qy * qy) - (px * px + py * py)) / (2 * (qx - px))
    tx, ty = -py, px - xc
    if tx * (qx - px) + ty * (qy - py) < 0:
        tx, ty = -tx, -ty
    return math.atan2(ty, tx)


def _closest_approach(surface, p, theta, q, L_max, rtol):
    """Run the ray from ``p`` until it stops approaching ``q``.

    Approach is measured in the flat metric on plane charts and in the
    hyperbolic comparison metric on half-plane charts; both are
    bi-Lipschitz to the surface metric for the built-in families.
    Returns ``(t*, signed miss)``; the sign is positive when ``q`` lies to
    the left of the ray.
    """
    qx, qy = q
    s0 = surface._to_state(p, theta)
    halfplane = surface.chart == "halfplane"

    def gap(t, s):
        c, sn = math.cos(s[2]), math.sin(s[2])
        if halfplane:
            y = math.exp(s[1])
            x = s[0] * y
            dx, dy = x - qx, y - qy
            return 2 * (dx * c + dy * sn) - (dx * dx + dy * dy) * sn / y
        return (s[0] - qx) * c + (s[1] - qy) * sn

    gap.terminal = True
    gap.direction = 1.0
    if gap(0.0, s0) >= 0:
        t_star, s_star = 0.0, s0
    else:
        res = integrate(surface._rhs, 0.0, L_max, s0, rtol=rtol, atol=1e-14, events=gap)
        if res.t_events[0].size:
            t_star, s_star = float(res.t_events[0][0]), res.y_events[0][0]
        else:
            t_star, s_star = float(res.t[-1]), res.y[:, -1]
    x, y = (float(c) for c in surface._chart_xy(s_star[0], s_star[1]))
    th = s_star[2]
    cross = math.cos(th) * (qy - y) - math.sin(th) * (qx - x)
    mx, my = 0.5 * (x + qx), 0.5 * (y + qy)
    chord2 = (qx - x) ** 2 + (qy - y) ** 2
    if halfplane:
        dist = math.acosh(1.0 + chord2 / (2 * y * qy)) if chord2 > 0 else 0.0
        miss = float(np.exp(surface.phi(mx, my))) * my * dist
    else:
        miss = float(np.exp(surface.phi(mx, my))) * math.sqrt(chord2)
    return t_star, math.copysign(miss, cross) if miss > 0 else 0.0


def shoot(surface, p, q, tol=1e-8, L_max=None, rtol=1e-12, theta_guess=None, guess_width=0.05):
    """Solve the two-point problem from ``p`` to ``q`` by shooting on the angle.

    The signed miss is monotone in the initial angle on a surface without
    conjugate points.  It is bracketed around the comparison-geometry
    direction of ``q`` (straight line or hyperbolic arc), or first around
    ``theta_guess`` when one is supplied, and solved with Brent's method.
    """
    p = (float(p[0]), float(p[1]))
    q = (float(q[0]), float(q[1]))
    if not (surface.in_domain(p) and surface.in_domain(q)):
        raise PreconditionError("points must lie in the chart domain")
    if p == q:
        return ShootResult(0.0, 0.0, 0.0, 0)
    if L_max is None:
        L_max = 200.0
    if surface.chart == "halfplane":
        theta0 = _h2_direction(p, q)
    else:
        theta0 = math.atan2(q[1] - p[1], q[0] - p[0])
    calls = [0]

    def miss(theta):
        calls[0] += 1
        return _closest_approach(surface, p, theta, q, L_max, rtol)[1]

    widths = [(theta0, 0.5 * math.pi), (theta0, 0.99 * math.pi)]
    if theta_guess is not None:
        widths.insert(0, (float(theta_guess), guess_width))
    best = None
    for centre, half_width in widths:
        a, b = centre - half_width, centre + half_width
        fa, fb = miss(a), miss(b)
        if fa * fb >= 0:
            continue
        # a bracket can straddle the sign jump behind the ray; such roots
        # fail the miss test and the next bracket is tried
        theta = brentq(miss, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        t_star, m = _closest_approach(surface, p, theta, q, L_max, rtol)
        if abs(m) <= tol * (1 + t_star):
            return ShootResult(t_star, theta, m, calls[0] + 1)
        if best is None or abs(m) < best:
            best = abs(m)
    if best is None:
        raise ShootingError(f"could not bracket the shooting angle from {p} to {q}")
    raise ShootingError(f"shooting from {p} to {q} missed by {best:.3g} after {calls[0]} rays")


def surface_distance(surface, p, q, tol=1e-8):
    """Length of the geodesic from ``p`` to ``q``."""
    return shoot(surface, p, q, tol).distance


@dataclass
class BusemannValue:
    value: float
    cauchy: float
    converged: bool
    horizon: float
    direction: float  # chart angle at q of -grad b_v


def busemann_value(surface, v, q, T_horizon=20.0, tol=1e-4, shoot_tol=None):
    """``b_v(q) ~ d(c_v(T), q) - T`` with a Cauchy check at ``T / 2``.

    ``v`` is ``(p, theta)``.  The result also carries the chart angle at
    ``q`` of the geodesic towards ``c_v(T)``, which approximates
    ``-grad b_v(q)``.

    The closest-approach length differs from the distance by about
    ``miss^2 / 2``, so the default shooting tolerance is chosen to keep
    that below ``tol / 100``.  Much tighter misses are not reachable at
    ``T = 20``: near the ideal boundary of a half-plane chart the
    coordinates themselves resolve only ``~1e-16 |x| / y`` metric units.
    """
    if shoot_tol is None:
        shoot_tol = math.sqrt(0.02 * tol) / (1.0 + T_horizon)
    if T_horizon < 10:
        raise PreconditionError("Busemann horizon must be at least 10")
    if not surface.strictly_negative:
        raise PreconditionError("Busemann approximants need strictly negative curvature")
    p, theta = v
    path, _ = surface_geodesic(surface, p, theta, T=T_horizon)
    vals = []
    for T in (0.5 * T_horizon, T_horizon):
        target = tuple(float(c) for c in path.point(T))
        res = shoot(surface, q, target, shoot_tol)
        vals.append((res.distance - T, res.theta))
    cauchy = abs(vals[1][0] - vals[0][0])
    return BusemannValue(vals[1][0], cauchy, cauchy < tol, T_horizon, vals[1][1])
