"""Explicit constants from the a-priori estimates for Jacobi tensors.

All functions accept ``R0 = 0`` and use the limit
``sqrt(R0) * coth(t * sqrt(R0)) -> 1 / t``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad


def sqrt_coth(R0, t):
    """``sqrt(R0) * coth(t * sqrt(R0))`` for ``t > 0``."""
    s = math.sqrt(R0)
    if s * t < 1e-8:
        return 1.0 / t + s * s * t / 3.0
    return s / math.tanh(s * t)


def C1(R0, r0, T):
    """Bound on ``||S_{v,r}(t)||`` for ``r >= r0`` and ``0 <= t <= T``."""
    return math.exp(T * math.sqrt(R0 * R0 + 1.0)) * math.sqrt(1.0 + sqrt_coth(R0, r0) ** 2)


def a1(R0):
    """Growth constant: ``||S_{v,r}(-t)|| <= a1 e^{sqrt(R0) t}`` for ``r > 1``."""
    if R0 <= 0:
        return math.inf
    return 1.0 / (1.0 - math.exp(-2.0 * math.sqrt(R0)))


def a2(R0, rho):
    """Decay constant: ``||S_{v,r}(t)|| <= a2 e^{-rho t / 2}`` when ``D >= rho``."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return math.sqrt(C1(R0, 1.0, 1.0) / min(rho / math.e, math.exp(-rho)))


def ar_constant(R0, rho):
    """``a`` in ``S'(0) - S'_{v,r}(0) <= a / r``."""
    return a2(R0, rho) ** 2


def b_function(t, R0, rho):
    """Envelope ``b(t)`` for ``||S_{v,r}(t)||`` (and ``||U_{v,r}(-t)||``)."""
    t = np.asarray(t, dtype=float)
    up = a2(R0, rho) * np.exp(-0.5 * rho * t)
    down = a1(R0) * np.exp(math.sqrt(R0) * np.abs(t))
    out = np.where(t >= 0, up, down)
    return float(out) if out.ndim == 0 else out


def _int_b(R0, rho, r, power=1):
    f = lambda t: b_function(t, R0, rho) ** power
    return quad(f, -r, 0.0, epsabs=0, epsrel=1e-12)[0] + quad(f, 0.0, r, epsabs=0, epsrel=1e-12)[0]


def C2(R0, rho, r):
    return math.sqrt(R0) + R0 * _int_b(R0, rho, r)


def C3(R0, R0p, rho, r):
    """Uses ``b* = sup_{|t| < r} b(t)`` in place of the pointwise ``b(t)``."""
    bstar = max(a1(R0) * math.exp(math.sqrt(R0) * r), a2(R0, rho))
    return R0p * bstar + R0 * C2(R0, rho, r) + 2.0 * R0**1.5 * bstar


def C4(R0, R0p, rho, r, m=1):
    """Operator-norm bound on ``d/ds R`` per unit ``||beta'||`` (``m`` components)."""
    return m * (C3(R0, R0p, rho, r) + R0 * C2(R0, rho, r))


def C5(R0, R0p, rho, r, m=1):
    """Lipschitz constant for second fundamental forms along a stable curve."""
    return C4(R0, R0p, rho, r, m) * _int_b(R0, rho, r, power=2)


def proof_constants(R0, R0p, rho, r, m=1):
    """Every constant of the variation estimate, for reports."""
    return {
        "R0": R0,
        "R0p": R0p,
        "rho": rho,
        "r": r,
        "a1": a1(R0),
        "a2": a2(R0, rho),
        "C1_111": C1(R0, 1.0, 1.0),
        "C2": C2(R0, rho, r),
        "C3": C3(R0, R0p, rho, r),
        "C4": C4(R0, R0p, rho, r, m),
        "C5": C5(R0, R0p, rho, r, m),
    }
