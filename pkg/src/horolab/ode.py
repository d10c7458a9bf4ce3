"""Adaptive integration and quadrature helpers shared by every module."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, SingularTensorError

RTOL = 1e-11
ATOL = 1e-13
COND_LIMIT = 1e12


def integrate(rhs, t0, t1, y0, rtol=RTOL, atol=ATOL, events=None, max_step=np.inf):
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` with DOP853.

    Returns the scipy result object with a dense solution attached.
    Raises :class:`IntegrationError` (carrying the failing time) if the
    step size underflows or the right-hand side produces non-finite values.
    """
    y0 = np.asarray(y0, dtype=float)
    if t0 == t1:
        raise IntegrationError("empty integration interval", t0)
    res = solve_ivp(
        rhs,
        (t0, t1),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=events,
        max_step=max_step,
    )
    if res.status == -1:
        raise IntegrationError(f"integrator failure: {res.message}", float(res.t[-1]))
    if not np.all(np.isfinite(res.y[:, -1])):
        raise IntegrationError("non-finite state", float(res.t[-1]))
    return res


class PiecewiseSolution:
    """Dense evaluator glued from one or more scipy ``OdeSolution`` pieces.

    Pieces are given as ``(lo, hi, sol)``; evaluation outside the union of
    the pieces raises ``ValueError``.
    """

    def __init__(self, pieces):
        self.pieces = sorted(pieces, key=lambda p: p[0])
        self.lo = self.pieces[0][0]
        self.hi = self.pieces[-1][1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        span = 1e-12 * max(1.0, abs(self.lo), abs(self.hi))
        if np.any(tt < self.lo - span) or np.any(tt > self.hi + span):
            raise ValueError(
                f"evaluation outside [{self.lo:.6g}, {self.hi:.6g}]: "
                f"[{tt.min():.6g}, {tt.max():.6g}]"
            )
        out = None
        for lo, hi, sol in self.pieces:
            mask = (tt >= lo - span) & (tt <= hi + span)
            if out is not None:
                mask &= ~done
            if not np.any(mask):
                continue
            vals = np.atleast_2d(sol(np.clip(tt[mask], min(lo, hi), max(lo, hi))))
            if out is None:
                out = np.empty((vals.shape[0], tt.size))
                done = np.zeros(tt.size, dtype=bool)
            out[:, mask] = vals
            done |= mask
        return out[:, 0] if scalar else out


def solve_checked(a, b, what="matrix"):
    """``a^{-1} b`` with an explicit condition-number guard.

    The guard uses ``a`` with unit-norm columns, so tensors whose columns
    merely grow at different exponential rates are not flagged.
    """
    a = np.atleast_2d(a)
    scale = np.linalg.norm(a, axis=0)
    if not np.all(np.isfinite(scale)) or np.any(scale == 0):
        raise SingularTensorError(f"{what} is numerically singular (zero column)", math.inf)
    an = a / scale
    cond = np.linalg.cond(an)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularTensorError(f"{what} is numerically singular (cond={cond:.3g})", cond)
    x = np.linalg.solve(an, b)
    return x / scale.reshape((-1,) + (1,) * (x.ndim - 1))


def inv_checked(a, what="matrix"):
    a = np.atleast_2d(a)
    return solve_checked(a, np.eye(a.shape[0]), what)


@lru_cache(maxsize=None)
def _gauss_nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_panels(a, b, n_panels, order=16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    x, w = _gauss_nodes(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def central_diff(f, t, h, order=2):
    """Derivative of a vectorised function by a 3- or 5-point stencil."""
    if order == 2:
        return (f(t + h) - f(t - h)) / (2 * h)
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)
