"""Locality-aware field-based rescaling of 14-bit thermal infrared frames."""
from ._backend import available as available_backends
from .errors import LoadError, ParameterError
from .fieldcore import (FieldscaleParams, LesTarget, Role, build_fields, les, mp, mp_step,
                        neighborhood_average, pool_minmax, upsample_bilinear)
from .rescaler import (TemporalState, clahe, fieldscale, gamma_correct, rescale_with_fields,
                       smooth_fields)

__version__ = "0.1.0"


def backend() -> str:
    """Name of the kernel backend currently in use ("compiled" or "python")."""
    from . import _backend
    return _backend.NAME


__all__ = [
    "FieldscaleParams", "LesTarget", "LoadError", "ParameterError", "Role", "TemporalState",
    "available_backends", "backend", "build_fields", "clahe", "fieldscale", "gamma_correct", "les",
    "mp", "mp_step", "neighborhood_average", "pool_minmax", "rescale_with_fields", "smooth_fields",
    "upsample_bilinear",
]
