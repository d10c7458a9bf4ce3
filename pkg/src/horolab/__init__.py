"""Numerical laboratory for Jacobi tensors, horospheres, volume growth and hyperbolicity."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    HorolabError,
    NumericalError,
    PreconditionError,
    ShootingError,
)
from .models import (  # noqa: E402
    CurvatureProfile,
    make_constant_diag_profile,
    make_sinusoidal_profile,
    make_tanh_poly_profile,
    reverse_profile,
    shift_profile,
)
from .surfaces import (  # noqa: E402
    ConformalSurface,
    busemann_value,
    hyperbolic_plane,
    pinched_surface,
    surface_distance,
    surface_geodesic,
)
from .jacobi import (  # noqa: E402
    a_tensor,
    boundary_tensor_S,
    boundary_tensor_U,
    integrate_jacobi,
    riccati_flow,
    stable_limit,
    unstable_limit,
)
from .asymptotic import asymptotic_forms  # noqa: E402
from .manifolds import HomogeneousModel, SurfaceModel, model_from_spec  # noqa: E402
