"""Manifold models: a rule that hands out a curvature profile per direction.

``HomogeneousModel`` uses one profile for every unit vector (space forms
and the diagonal symmetric-space models).  ``SurfaceModel`` integrates the
geodesic of a conformal surface for each requested direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import ConfigError
from .models import CurvatureProfile, profile_from_spec
from .surfaces import ConformalSurface, surface_from_spec, surface_geodesic


def sphere_area(k):
    """Volume of the unit sphere ``S^k`` (``omega_k``)."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0)


@dataclass(frozen=True, eq=False)
class HomogeneousModel:
    profile: CurvatureProfile
    name: str = "homogeneous"

    homogeneous = True

    @property
    def dim_manifold(self):
        return self.profile.dim_manifold

    @property
    def curvature_bound(self):
        return self.profile.curvature_bound

    @property
    def default_point(self):
        return None

    def profile_at(self, p=None, direction=None):
        return self.profile

    def sample_directions(self, n, seed=0):
        """``n`` directions; they all carry the same profile."""
        rng = np.random.default_rng(seed)
        v = rng.normal(size=(n, self.dim_manifold))
        return [(None, row / np.linalg.norm(row)) for row in v]


@dataclass(frozen=True, eq=False)
class SurfaceModel:
    surface: ConformalSurface
    base_point: tuple = None
    horizon: float = 40.0
    name: str = "surface"
    _cache: dict = field(default_factory=dict, repr=False)

    homogeneous = False
    dim_manifold = 2

    @property
    def curvature_bound(self):
        return self.surface.curvature_bound

    @property
    def default_point(self):
        if self.base_point is not None:
            return tuple(self.base_point)
        return (0.0, 1.0) if self.surface.chart == "halfplane" else (0.0, 0.0)

    def geodesic(self, p, theta):
        key = (tuple(float(c) for c in p), float(theta))
        if key not in self._cache:
            self._cache[key] = surface_geodesic(self.surface, key[0], key[1], T=self.horizon)
        return self._cache[key]

    def profile_at(self, p=None, direction=0.0):
        p = self.default_point if p is None else p
        return self.geodesic(p, direction)[1]

    def sample_directions(self, n, seed=0, spread=1.0):
        """Footpoints near the base point and uniformly random angles."""
        rng = np.random.default_rng(seed)
        x0, y0 = self.default_point
        out = []
        for _ in range(n):
            dx, dy = rng.uniform(-spread, spread, size=2)
            if self.surface.chart == "halfplane":
                p = (x0 + dx * y0, y0 * math.exp(dy))
            else:
                p = (x0 + dx, y0 + dy)
            out.append((p, float(rng.uniform(0, 2 * math.pi))))
        return out


def model_from_spec(spec):
    """Model from a JSON-style mapping (profile kinds or ``surface``)."""
    if not isinstance(spec, dict):
        raise ConfigError("model must be a JSON object")
    if spec.get("kind") == "surface":
        base = spec.get("base_point")
        return SurfaceModel(surface_from_spec(spec), tuple(base) if base else None, name="surface")
    prof = profile_from_spec(spec)
    return HomogeneousModel(prof, name=str(spec.get("kind")))
