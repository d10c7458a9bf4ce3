"""Curvature profiles along a geodesic.

A profile is the map ``t -> R_v(t)`` written in a parallel orthonormal frame
of the normal bundle of a unit-speed geodesic.  Everything downstream
(Jacobi tensors, Riccati flows, volumes) consumes nothing else.

Profiles are immutable.  Shifting and reversing do not wrap closures around
closures; they adjust an affine reparametrisation ``t -> sign * t + offset``
of a shared base function, so repeated shifts compose exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigError

KINDS = ("constant_diagonal", "time_varying", "surface_borne")


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Curvature operator along a geodesic.

    Attributes
    ----------
    dim_normal : int
        ``m = n - 1``, the size of the matrices returned by :meth:`evaluate`.
    curvature_bound : float
        ``R0`` with ``||R_v(t)|| <= R0`` for every ``t``.
    kind : str
        One of ``constant_diagonal``, ``time_varying``, ``surface_borne``.
    base : callable
        Vectorised ``t -> (..., m, m)`` in the unshifted parametrisation.
    sign, offset : float
        The profile evaluates ``base(sign * t + offset)``.
    """

    dim_normal: int
    curvature_bound: float
    kind: str
    base: Callable[[np.ndarray], np.ndarray]
    sign: float = 1.0
    offset: float = 0.0
    flags: tuple = ()
    descriptor: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.dim_normal < 1:
            raise ConfigError("dim_normal must be >= 1")

    @property
    def dim_manifold(self):
        return self.dim_normal + 1

    @property
    def key(self):
        """Hashable identity of the geodesic this profile lives on."""
        base_id = self.descriptor if self.descriptor else ("fn", id(self.base))
        return (base_id, self.sign, self.offset)

    def same_geodesic(self, other):
        return self.key == other.key

    def evaluate(self, t):
        """``R_v(t)``; a scalar ``t`` gives ``(m, m)``, an array gives ``(k, m, m)``."""
        t = np.asarray(t, dtype=float)
        return self.base(self.sign * t + self.offset)

    def __call__(self, t):
        return self.evaluate(t)

    @property
    def is_constant(self):
        return self.kind == "constant_diagonal"


def _is_finite_list(values):
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)


def make_constant_diag_profile(eigenvalues):
    """Constant curvature operator ``diag(eigenvalues)``.

    Positive eigenvalues are accepted but the profile carries the flag
    ``"conjugate-point risk"``.
    """
    vals = [float(v) for v in eigenvalues] if eigenvalues is not None else []
    if not vals:
        raise ConfigError("eigenvalue list must be nonempty")
    if not _is_finite_list(vals):
        raise ConfigError(f"eigenvalues must be finite reals, got {eigenvalues!r}")
    mat = np.diag(vals)
    flags = ("conjugate-point risk",) if any(v > 0 for v in vals) else ()

    def base(t, mat=mat):
        t = np.asarray(t)
        if t.ndim == 0:
            return mat.copy()
        return np.broadcast_to(mat, t.shape + mat.shape).copy()

    return CurvatureProfile(
        dim_normal=len(vals),
        curvature_bound=float(max(abs(v) for v in vals)),
        kind="constant_diagonal",
        base=base,
        flags=flags,
        descriptor=("constant_diag", tuple(vals)),
    )


def _as_sym_matrix(spec, m=None, what="matrix"):
    arr = np.asarray(spec, dtype=float)
    if arr.ndim == 0:
        if m is None:
            arr = arr.reshape(1, 1)
        else:
            arr = arr * np.eye(m)
    elif arr.ndim == 1:
        arr = np.diag(arr)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"{what} must be square")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} has non-finite entries")
    if np.max(np.abs(arr - arr.T), initial=0.0) > 1e-14 * (1 + np.abs(arr).max()):
        raise ConfigError(f"{what} must be symmetric")
    return 0.5 * (arr + arr.T)


def make_sinusoidal_profile(mean, amplitude, frequency=1.0, phase=0.0):
    """``R(t) = mean + amplitude * sin(frequency * t + phase)``.

    ``mean`` and ``amplitude`` may be scalars, diagonals or full symmetric
    matrices.  Non-commuting choices give genuinely matrix-valued problems.
    """
    m0 = _as_sym_matrix(mean, what="mean")
    m = m0.shape[0]
    m1 = _as_sym_matrix(amplitude, m=m, what="amplitude")
    if m1.shape != m0.shape:
        raise ConfigError("mean and amplitude must have the same size")
    w, ph = float(frequency), float(phase)
    bound = float(np.linalg.norm(m0, 2) + np.linalg.norm(m1, 2))
    if m == 1:
        bound = float(max(abs(m0[0, 0] + m1[0, 0]), abs(m0[0, 0] - m1[0, 0])))
    top = np.linalg.eigvalsh(m0).max() + np.linalg.norm(m1, 2)
    flags = ("conjugate-point risk",) if top > 0 else ()

    def base(t):
        t = np.asarray(t, dtype=float)
        s = np.sin(w * t + ph)
        return m0 + s[..., None, None] * m1

    return CurvatureProfile(
        dim_normal=m,
        curvature_bound=bound,
        kind="time_varying",
        base=base,
        flags=flags,
        descriptor=("sinusoidal", m0.tobytes(), m1.tobytes(), w, ph),
    )


def make_tanh_poly_profile(coefficients, scale=1.0):
    """``R(t) = sum_k C_k tanh(t / scale)**k`` with symmetric ``C_k``."""
    if not coefficients:
        raise ConfigError("tanh_poly needs at least one coefficient")
    mats = [_as_sym_matrix(coefficients[0], what="coefficient 0")]
    m = mats[0].shape[0]
    for k, c in enumerate(coefficients[1:], start=1):
        mk = _as_sym_matrix(c, m=m, what=f"coefficient {k}")
        if mk.shape != mats[0].shape:
            raise ConfigError("all tanh_poly coefficients must have the same size")
        mats.append(mk)
    scale = float(scale)
    if not scale > 0:
        raise ConfigError("scale must be positive")
    stack = np.stack(mats)
    # sup over tau in [-1, 1] of the operator norm, sampled densely
    taus = np.linspace(-1.0, 1.0, 2001)
    powers = taus[:, None] ** np.arange(len(mats))[None, :]
    vals = np.einsum("tk,kij->tij", powers, stack)
    norms = np.abs(np.linalg.eigvalsh(vals)).max(axis=1)
    bound = float(norms.max())
    top = float(np.linalg.eigvalsh(vals).max())
    flags = ("conjugate-point risk",) if top > 0 else ()

    def base(t):
        tau = np.tanh(np.asarray(t, dtype=float) / scale)
        pw = tau[..., None] ** np.arange(len(mats))
        return np.einsum("...k,kij->...ij", pw, stack)

    return CurvatureProfile(
        dim_normal=m,
        curvature_bound=bound,
        kind="time_varying",
        base=base,
        flags=flags,
        descriptor=("tanh_poly", stack.tobytes(), scale),
    )


def shift_profile(profile, t0):
    """Profile of ``phi^{t0} v``: ``evaluate'(t) = evaluate(t + t0)``."""
    if profile.is_constant:
        return profile
    return replace(profile, offset=profile.offset + profile.sign * float(t0))


def reverse_profile(profile):
    """Profile of ``-v``: ``evaluate'(t) = evaluate(-t)``."""
    if profile.is_constant:
        return profile
    return replace(profile, sign=-profile.sign)


TIME_VARYING_FAMILIES = {
    "constant": lambda p: make_sinusoidal_profile(p["value"], 0.0),
    "sinusoidal": lambda p: make_sinusoidal_profile(
        p["mean"], p.get("amplitude", 0.0), p.get("frequency", 1.0), p.get("phase", 0.0)
    ),
    "tanh_poly": lambda p: make_tanh_poly_profile(p["coefficients"], p.get("scale", 1.0)),
}


def profile_from_spec(spec):
    """Build a profile from a JSON-style mapping.

    ``{"kind": "constant_diag", "eigenvalues": [...]}`` or
    ``{"kind": "time_varying", "expr": {"family": ..., ...}}``.
    """
    if not isinstance(spec, dict):
        raise ConfigError("model must be a JSON object")
    kind = spec.get("kind")
    if kind == "constant_diag":
        return make_constant_diag_profile(spec.get("eigenvalues"))
    if kind == "time_varying":
        expr = spec.get("expr")
        if not isinstance(expr, dict) or expr.get("family") not in TIME_VARYING_FAMILIES:
            raise ConfigError(
                f"time_varying expr must name one of {sorted(TIME_VARYING_FAMILIES)}"
            )
        try:
            return TIME_VARYING_FAMILIES[expr["family"]](expr)
        except KeyError as exc:
            raise ConfigError(f"missing parameter {exc} for family {expr['family']}") from None
    raise ConfigError(f"not a profile model kind: {kind!r}")
