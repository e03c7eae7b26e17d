"""Integral Apollonian circle packings: exact orbit counts, prime curvatures,
mod-p orbit structure and inversive geometry."""

__version__ = "0.1.0"

from .descartes import (  # noqa: E402
    PackingKind,
    Quadruple,
    RootQuadruple,
    descartes_form,
    flip,
    is_descartes,
    is_root,
    reduce_to_root,
)
from .errors import (  # noqa: E402
    ApollonianError,
    ArithmeticOverflowError,
    InternalInvariantError,
    InvalidInputError,
    ResourceError,
)
from .orbit import (  # noqa: E402
    BACKEND,
    count_circles,
    count_series,
    count_tangent_pairs,
    enumerate_circles,
)
from .series import CountSeries, geometric_grid  # noqa: E402

__all__ = [
    "PackingKind",
    "Quadruple",
    "RootQuadruple",
    "descartes_form",
    "flip",
    "is_descartes",
    "is_root",
    "reduce_to_root",
    "ApollonianError",
    "ArithmeticOverflowError",
    "InternalInvariantError",
    "InvalidInputError",
    "ResourceError",
    "BACKEND",
    "count_circles",
    "count_series",
    "count_tangent_pairs",
    "enumerate_circles",
    "CountSeries",
    "geometric_grid",
]
