"""Logical-differencing estimation for dyadic NTU network formation."""

__version__ = "0.1.0"

from .core import (
    InputError,
    NetworkData,
    PairwiseTransform,
    angles_to_direction,
    direction_to_angles,
    pairwise_index,
)
from .kernels import BACKEND

__all__ = [
    "__version__",
    "BACKEND",
    "InputError",
    "NetworkData",
    "PairwiseTransform",
    "angles_to_direction",
    "direction_to_angles",
    "pairwise_index",
]
