"""Shared domain types: networks, pairwise transforms and angle geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np


class InputError(ValueError):
    """Raised when an operation receives malformed input."""


class NumericError(ArithmeticError):
    """Raised when a computation produces non-finite or otherwise unusable values."""


# ---------------------------------------------------------------------------
# Network data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkData:
    """Observed undirected network plus node covariates.

    Parameters
    ----------
    adjacency : (n, n) array
        Binary, symmetric, zero diagonal.
    covariates : (n, d_x) array
        Row ``i`` holds ``X_i``.
    pairwise : (n, n, d) array, optional
        Precomputed ``W[i, k] = w(X_i, X_k)``. Real-data ingestion builds this
        from a regressor recipe; synthetic data leaves it ``None`` and it is
        derived from a :class:`PairwiseTransform` on demand.
    """

    adjacency: np.ndarray
    covariates: np.ndarray
    pairwise: np.ndarray | None = None
    node_ids: tuple | None = None

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[:, None]
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InputError("adjacency must be a square matrix")
        if cov.shape[0] != adj.shape[0]:
            raise InputError("covariates must have one row per node")
        if not np.all((adj == 0) | (adj == 1)):
            raise InputError("adjacency entries must be 0 or 1")
        if not np.array_equal(adj, adj.T):
            raise InputError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0):
            raise InputError("adjacency must have a zero diagonal")
        if np.isnan(cov).any():
            raise InputError("covariates contain missing values")
        adj = adj.astype(np.int8)
        adj.setflags(write=False)
        cov = cov.copy()
        cov.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "covariates", cov)
        if self.pairwise is not None:
            W = np.asarray(self.pairwise, dtype=float)
            if W.ndim != 3 or W.shape[:2] != adj.shape:
                raise InputError("pairwise must have shape (n, n, d)")
            W = W.copy()
            W.setflags(write=False)
            object.__setattr__(self, "pairwise", W)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def density(self) -> float:
        n = self.n
        if n < 2:
            return 0.0
        return float(self.adjacency.sum()) / (n * (n - 1))


# ---------------------------------------------------------------------------
# Pairwise transforms w(x, y)
# ---------------------------------------------------------------------------

_CUSTOM_TRANSFORMS: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {}


def register_transform(name: str, func=None):
    """Register a custom pairwise transform under ``name``.

    ``func(x, y)`` must accept broadcastable arrays whose last axis holds the
    covariates and return the index vectors along the last axis. Usable as a
    decorator.
    """

    def _register(f):
        _CUSTOM_TRANSFORMS[name] = f
        return f

    if func is None:
        return _register
    return _register(func)


SYMMETRIC_ABS_DIFF = "symmetric_abs_diff"
ASYMMETRIC_LAST_COORD = "asymmetric_last_coord"


@dataclass(frozen=True)
class PairwiseTransform:
    """Known pairwise map ``w: R^{d_x} x R^{d_x} -> R^d``.

    ``variant`` is one of ``"symmetric_abs_diff"``, ``"asymmetric_last_coord"``
    or the name of a function registered with :func:`register_transform`.
    """

    variant: str = SYMMETRIC_ABS_DIFF
    d: int | None = None
    symmetric: bool | None = field(default=None)

    def __post_init__(self):
        if self.variant not in (SYMMETRIC_ABS_DIFF, ASYMMETRIC_LAST_COORD) and (
            self.variant not in _CUSTOM_TRANSFORMS
        ):
            raise InputError(f"unknown pairwise transform {self.variant!r}")
        if self.symmetric is None:
            object.__setattr__(self, "symmetric", self.variant != ASYMMETRIC_LAST_COORD)

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1] != y.shape[-1]:
            raise InputError(
                f"covariate dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}"
            )
        builtin = self.variant in (SYMMETRIC_ABS_DIFF, ASYMMETRIC_LAST_COORD)
        if builtin and self.d is not None and x.shape[-1] != self.d:
            raise InputError(f"expected covariates of length {self.d}")
        if self.variant == SYMMETRIC_ABS_DIFF:
            return np.abs(x - y)
        if self.variant == ASYMMETRIC_LAST_COORD:
            out = np.abs(x - y)
            out[..., -1] = np.abs(2.0 * x[..., -1] - y[..., -1]) * (2.0 / 3.0)
            return out
        return np.asarray(_CUSTOM_TRANSFORMS[self.variant](x, y), dtype=float)

    def matrix(self, covariates) -> np.ndarray:
        """All ``W[i, k] = w(X_i, X_k)`` as an ``(n, n, d)`` array."""
        X = np.asarray(covariates, dtype=float)
        return self(X[:, None, :], X[None, :, :])


def pairwise_index(w: PairwiseTransform, x_i, x_j) -> np.ndarray:
    """Return ``W_ij = w(x_i, x_j)``."""
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    x_j = np.atleast_1d(np.asarray(x_j, dtype=float))
    if x_i.shape != x_j.shape:
        raise InputError(f"covariate dimension mismatch: {x_i.shape} vs {x_j.shape}")
    return w(x_i, x_j)


# ---------------------------------------------------------------------------
# Directions and hyperspherical angles
# ---------------------------------------------------------------------------


def as_direction(beta) -> np.ndarray:
    """Normalize ``beta`` onto the unit sphere."""
    beta = np.asarray(beta, dtype=float)
    norm = np.linalg.norm(beta)
    if norm == 0 or not np.isfinite(norm):
        raise InputError("direction must be a finite nonzero vector")
    return beta / norm


def angle_domain(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Global bounds of the angle space for ``S^{d-1}``.

    The first ``d - 2`` angles live in ``[-pi/2, pi/2]``, the last in
    ``[-pi, pi]``.
    """
    if d < 2:
        raise InputError("need d >= 2")
    lo = np.full(d - 1, -np.pi / 2)
    hi = np.full(d - 1, np.pi / 2)
    lo[-1], hi[-1] = -np.pi, np.pi
    return lo, hi


def angles_to_direction(theta) -> np.ndarray:
    """Map angle vectors to unit directions.

    Nested hyperspherical coordinates: ``beta_d = sin(t1)``,
    ``beta_{d-1} = cos(t1) sin(t2)``, ..., ``beta_1 = cos(t1)...cos(t_{d-1})``.
    For ``d = 3`` this is ``(cos t1 cos t2, cos t1 sin t2, sin t1)``.
    Accepts a single vector or a stack with angles on the last axis.
    """
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[-1]
    d = m + 1
    out = np.empty(theta.shape[:-1] + (d,))
    c = np.ones(theta.shape[:-1])
    for a in range(m):
        t = theta[..., a]
        out[..., d - 1 - a] = c * np.sin(t)
        c = c * np.cos(t)
    out[..., 0] = c
    return out


def direction_to_angles(beta) -> np.ndarray:
    """Inverse of :func:`angles_to_direction`; free angles at poles are 0."""
    beta = np.asarray(beta, dtype=float)
    d = beta.shape[-1]
    out = np.empty(beta.shape[:-1] + (d - 1,))
    for a in range(d - 2):
        rest = np.sqrt(np.sum(beta[..., : d - 1 - a] ** 2, axis=-1))
        out[..., a] = np.arctan2(beta[..., d - 1 - a], rest)
    # atan2(0, 0) == 0 supplies the pole convention for the free angles.
    out[..., d - 2] = np.arctan2(beta[..., 1], beta[..., 0])
    return out + 0.0


def angular_distance(u, v) -> np.ndarray:
    """Great-circle angle (radians) between unit vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v), axis=-1) if u.shape[-1] == 3 else None
    dot = np.sum(u * v, axis=-1)
    if cross is not None:
        return np.arctan2(cross, dot)
    return np.arccos(np.clip(dot, -1.0, 1.0))
