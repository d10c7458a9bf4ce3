"""Stable curves on conformal surfaces and the variation of ``S'_{v,r}(0)``.

A stable curve through ``v`` is a piece of the horocycle ``b_v = 0``
together with the unit field ``-grad b_v`` along it.  Along such a curve
the derivative of ``S'_{gamma(s),r}(0)`` is an integral of the curvature
variation against ``S_{gamma(s),r}^2``; on a surface the curvature
variation is ``dK(J_s(t))`` where ``J_s`` is the stable Jacobi field
generated by the curve.  Both sides of the resulting identity are
computed here without sharing any intermediate quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C5, b_function, proof_constants
from .errors import PreconditionError, QuadratureError
from .jacobi import boundary_derivative_S, boundary_derivative_U, boundary_tensor_S, boundary_tensor_U
from .jacobi import stable_tensor
from .ode import gauss_panels
from .surfaces import shoot, surface_distance, surface_geodesic


def _chart_step(surface, q, angle, length, at=None):
    """Move ``length`` metric units from ``q`` along a chart angle.

    The conformal factor is taken at ``at`` (default ``q``); passing the
    step midpoint makes the step length second-order accurate.
    """
    a = q if at is None else at
    em = float(np.exp(-surface.phi(a[0], a[1])))
    return (q[0] + length * em * math.cos(angle), q[1] + length * em * math.sin(angle))


class BusemannField:
    """``b_v`` and ``-grad b_v`` from geodesics aimed at ``c_v(T)``."""

    def __init__(self, surface, v, T_horizon=12.0, shoot_tol=1e-7):
        if not surface.strictly_negative:
            raise PreconditionError("Busemann functions need strictly negative curvature")
        p, theta = v
        self.surface = surface
        self.v = ((float(p[0]), float(p[1])), float(theta))
        self.T = float(T_horizon)
        self.shoot_tol = shoot_tol
        path, _ = surface_geodesic(surface, p, theta, T=self.T)
        self.target = tuple(float(c) for c in path.point(self.T))
        self.target_half = tuple(float(c) for c in path.point(0.5 * self.T))

    def __call__(self, q, guess=None):
        """``(b_v(q), chart angle of -grad b_v at q)``."""
        res = shoot(self.surface, q, self.target, self.shoot_tol, theta_guess=guess)
        return res.distance - self.T, res.theta

    def cauchy(self, q):
        b_full = self(q)[0]
        b_half = shoot(self.surface, q, self.target_half, self.shoot_tol).distance - 0.5 * self.T
        return abs(b_full - b_half)

    def gradient_fd(self, q, h=1e-4):
        """Chart angle of ``-grad b_v`` from central differences (metric step ``h``)."""
        em = float(np.exp(-self.surface.phi(q[0], q[1])))
        dx = h * em
        bx = (self(( q[0] + dx, q[1]))[0] - self((q[0] - dx, q[1]))[0]) / (2 * h)
        by = (self((q[0], q[1] + dx))[0] - self((q[0], q[1] - dx))[0]) / (2 * h)
        return math.atan2(-by, -bx), math.hypot(bx, by)


@dataclass
class StableCurve:
    """Samples of a stable curve; ``s`` runs over ``[0, 1]``, ``gamma(0) = v``."""

    surface: object
    v: tuple
    s: np.ndarray
    points: list
    angles: np.ndarray
    busemann: np.ndarray
    length: float
    chord_length: float
    side: int

    @property
    def vectors(self):
        return list(zip(self.points, self.angles))

    def unit_norms(self):
        out = []
        for (x, y), a in zip(self.points, self.angles):
            em = float(np.exp(-self.surface.phi(x, y)))
            out.append(self.surface.metric_norm(x, y, em * math.cos(a), em * math.sin(a)))
        return np.array(out, dtype=float)

    def subcurve(self, stride=1, stop=None):
        """Every ``stride``-th sample up to index ``stop``, re-parametrised to ``[0, 1]``."""
        idx = np.arange(0, len(self.s) if stop is None else stop + 1, stride)
        frac = self.s[idx[-1]] - self.s[idx[0]]
        return StableCurve(
            surface=self.surface,
            v=self.v,
            s=(self.s[idx] - self.s[idx[0]]) / frac if frac > 0 else self.s[idx],
            points=[self.points[i] for i in idx],
            angles=self.angles[idx],
            busemann=self.busemann[idx],
            length=self.length * frac,
            chord_length=float("nan"),
            side=self.side,
        )


def build_stable_curve(surface, v, arc_span, n_samples=9, T_horizon=12.0, side=1,
                       on_tol=1e-10, field=None):
    """Trace the horocycle ``b_v = 0`` from ``pi(v)`` for arc length ``arc_span``.

    Each step is a midpoint predictor along the horocycle tangent followed by
    a corrector that moves along ``-grad b_v`` by the current value of
    ``b_v``.  The field ``-grad b_v`` comes from the initial direction of
    the geodesic aimed at ``c_v(T)``.
    """
    if n_samples < 2:
        raise PreconditionError("need at least two samples")
    field = field or BusemannField(surface, v, T_horizon)
    p0, th0 = field.v
    pts, angs, bs = [p0], [th0], [0.0]
    if arc_span > 0:
        h = arc_span / (n_samples - 1)
        q, psi = p0, th0
        for _ in range(n_samples - 1):
            half = _chart_step(surface, q, psi + side * math.pi / 2, 0.5 * h)
            _, psi_half = field(half, psi)
            q = _chart_step(surface, q, psi_half + side * math.pi / 2, h, at=half)
            for _ in range(6):
                b, psi = field(q, psi_half)
                if abs(b) < on_tol:
                    break
                q = _chart_step(surface, q, psi, b)
            pts.append(q)
            angs.append(psi)
            bs.append(b)
    else:
        pts, angs, bs = pts * n_samples, angs * n_samples, bs * n_samples
    for b in bs:
        if abs(b) > 1e-4:
            raise PreconditionError("horocycle corrector did not converge")
    chord = sum(surface_distance(surface, pts[i], pts[i + 1]) for i in range(len(pts) - 1)) if arc_span > 0 else 0.0
    return StableCurve(
        surface=surface,
        v=field.v,
        s=np.linspace(0.0, 1.0, n_samples),
        points=pts,
        angles=np.array(angs),
        busemann=np.array(bs),
        length=float(arc_span),
        chord_length=float(chord),
        side=side,
    )


def comparison_rho(surface):
    """``rho`` with ``D >= rho`` implied by ``K <= -k^2``: ``rho = 2 k``."""
    kmax = surface.curvature_range[1]
    if kmax >= 0:
        raise PreconditionError("comparison rho needs strictly negative curvature")
    return 2.0 * math.sqrt(-kmax)


# -- the variation formula --------------------------------------------------------

def _curvature_variation(surface, p, theta, ts, pad=20.0):
    """``d/ds K(c_{gamma(s)}(t))`` per unit ``<beta', N>`` at the nodes ``ts``.

    The stable Jacobi field is ``S_{gamma(s)}(t) N(t)``; the curvature
    variation is ``dK(N(t))`` times its length.
    """
    lo, hi = float(np.min(ts)), float(np.max(ts))
    path, prof = surface_geodesic(surface, p, theta, T=max(abs(lo), abs(hi)) + pad + 1)
    St = stable_tensor(prof, max(hi, 1.0), lo=min(lo, 0.0), pad=pad)
    x, y = path.point(ts)
    nx, ny = path.normal(ts)
    kx, ky = surface.curvature_grad(x, y)
    return St(ts)[:, 0, 0] * (kx * nx + ky * ny), prof


def hopf_integrand(surface, p, theta, r, which="S", n_panels=8):
    """Inner ``t``-integral of the variation formula at one curve point, per unit ``|beta'|``."""
    if which == "S":
        ts, w = gauss_panels(0.0, r, n_panels)
    else:
        ts, w = gauss_panels(-r, 0.0, n_panels)
    dK, prof = _curvature_variation(surface, p, theta, ts)
    if which == "S":
        Y = boundary_tensor_S(prof, r)(ts)[:, 0, 0]
        return float(np.sum(w * Y * Y * dK))
    Y = boundary_tensor_U(prof, r)(ts)[:, 0, 0]
    return -float(np.sum(w * Y * Y * dK))


def _boundary_derivative(surface, p, theta, r, which):
    _, prof = surface_geodesic(surface, p, theta, T=r + 2)
    fn = boundary_derivative_S if which == "S" else boundary_derivative_U
    return float(fn(prof, r)[0, 0])


@dataclass
class HopfReport:
    lhs: float
    rhs: float
    residual: float
    relative: float
    rule: str
    n_intervals: int
    refinement: list


def verify_hopf_formula(surface, stable_curve, r=3.0, t_quad=8, s_quad=None, rule="rectangle",
                        which="S", refine=True):
    """Compare ``S'_{gamma(1),r}(0) - S'_{gamma(0),r}(0)`` with the double integral.

    ``rule`` selects the ``s``-quadrature over the curve samples:
    ``rectangle`` (left endpoints, first order) or ``trapezoid`` (second
    order).  With ``refine`` the report also lists the residuals for the
    nested coarser sample sets (every 2nd, 4th, ... sample) together with
    proportionally coarser ``t`` panels.
    """
    if not r > 1:
        raise PreconditionError("need r > 1")
    if rule not in ("rectangle", "trapezoid"):
        raise PreconditionError(f"unknown rule {rule!r}")
    n_int = len(stable_curve.s) - 1
    if s_quad is not None and s_quad != n_int:
        if n_int % s_quad:
            raise PreconditionError("s_quad must divide the number of curve intervals")
        stable_curve = stable_curve.subcurve(n_int // s_quad)
        n_int = s_quad
    (p0, a0), (p1, a1_) = stable_curve.vectors[0], stable_curve.vectors[-1]
    lhs = _boundary_derivative(surface, p1, a1_, r, which) - _boundary_derivative(surface, p0, a0, r, which)
    ell = stable_curve.length * stable_curve.side
    f = np.array([hopf_integrand(surface, p, a, r, which, t_quad) for p, a in stable_curve.vectors])

    def integrate_s(vals):
        n = len(vals) - 1
        if rule == "rectangle":
            return ell * float(np.sum(vals[:-1])) / n
        return ell * float(0.5 * vals[0] + np.sum(vals[1:-1]) + 0.5 * vals[-1]) / n

    rhs = integrate_s(f)
    refinement = []
    if refine:
        stride = 1
        while n_int // stride >= 2 and (n_int // stride) % 2 == 0 and len(refinement) < 3:
            sub = f[::stride]
            val = integrate_s(sub)
            refinement.append({"n_intervals": n_int // stride, "rhs": val, "residual": abs(lhs - val)})
            stride *= 2
        refinement.reverse()
    scale = max(abs(lhs), 1e-300)
    return HopfReport(lhs, rhs, abs(lhs - rhs), abs(lhs - rhs) / scale, rule, n_int, refinement)


@dataclass
class LipschitzReport:
    lengths: np.ndarray
    differences: np.ndarray
    ratios: np.ndarray
    variation: float
    C5: float
    constants: dict
    bounded: bool


def second_fundamental_lipschitz(surface, stable_curve, r=3.0, levels=3, which="S"):
    """``||S'_{gamma(s),r}(0) - S'_{gamma(0),r}(0)|| / l(beta|[0,s])`` on nested sub-arcs.

    Sub-arcs end at ``s = 1, 1/2, ..., 2^-levels``; the curve must carry
    ``2^levels`` intervals (or a multiple).
    """
    n_int = len(stable_curve.s) - 1
    if n_int % (2**levels):
        raise PreconditionError(f"curve needs a multiple of {2**levels} intervals")
    p0, a0 = stable_curve.vectors[0]
    base = _boundary_derivative(surface, p0, a0, r, which)
    lengths, diffs = [], []
    for k in range(levels + 1):
        idx = n_int // 2**k
        p, a = stable_curve.vectors[idx]
        diffs.append(abs(_boundary_derivative(surface, p, a, r, which) - base))
        lengths.append(stable_curve.length * stable_curve.s[idx])
    lengths, diffs = np.array(lengths), np.array(diffs)
    ratios = diffs / np.where(lengths > 0, lengths, np.inf)
    if ratios.max() > 0:
        variation = float((ratios.max() - ratios.min()) / ratios.max())
    else:
        variation = 0.0
    R0 = surface.curvature_bound
    R0p = surface.curvature_derivative_bound
    if surface.curvature_range[1] < 0:
        rho = comparison_rho(surface)
        consts = proof_constants(R0, R0p, rho, r)
        c5 = consts["C5"]
    else:
        consts, c5 = {}, math.inf
    return LipschitzReport(lengths, diffs, ratios, variation, c5, consts, bool(np.all(ratios <= c5)))


@dataclass
class ContractionReport:
    t: np.ndarray
    ratio: np.ndarray
    envelope: np.ndarray
    holds: bool


def stable_curve_contraction(surface, stable_curve, t_list=(0.5, 1.0, 2.0, 4.0)):
    """``l(beta_t) / l(beta)`` for the curve pushed along the geodesic flow, vs ``b(t)``."""
    rho = comparison_rho(surface)
    R0 = surface.curvature_bound
    base = sum(surface_distance(surface, a, b) for a, b in zip(stable_curve.points, stable_curve.points[1:]))
    ratios = []
    for t in t_list:
        moved = [tuple(float(c) for c in surface_geodesic(surface, p, a, T=t + 1)[0].point(t))
                 for p, a in stable_curve.vectors]
        lt = sum(surface_distance(surface, a, b) for a, b in zip(moved, moved[1:]))
        ratios.append(lt / base)
    t_arr = np.asarray(t_list, dtype=float)
    env = np.asarray(b_function(t_arr, R0, rho))
    ratios = np.array(ratios)
    return ContractionReport(t_arr, ratios, env, bool(np.all(ratios <= env)))


def horocycle_arc_within(surface, v, radius, step=0.05, field=None):
    """Length of ``{b_v = 0} ∩ B_radius(pi(v))`` by tracing both ways."""
    field = field or BusemannField(surface, v)
    p0 = field.v[0]
    total = 0.0
    for side in (1, -1):
        q, psi, run = p0, field.v[1], 0.0
        while True:
            half = _chart_step(surface, q, psi + side * math.pi / 2, 0.5 * step)
            _, psi_half = field(half, psi)
            nq = _chart_step(surface, q, psi_half + side * math.pi / 2, step, at=half)
            for _ in range(6):
                b, npsi = field(nq, psi_half)
                if abs(b) < 1e-10:
                    break
                nq = _chart_step(surface, nq, npsi, b)
            d_old = surface_distance(surface, p0, q) if run > 0 else 0.0
            d_new = surface_distance(surface, p0, nq)
            if d_new >= radius:
                total += run + step * (radius - d_old) / (d_new - d_old)
                break
            q, psi, run = nq, npsi, run + step
            if run > 1e3:
                raise QuadratureError("horocycle tracing did not leave the ball")
    return total
