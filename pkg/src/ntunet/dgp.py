"""Synthetic NTU network generation and closed-form linking probabilities.

Links follow a bilateral-consent rule: ``i`` and ``j`` link iff both
``w(X_i, X_j)'b + A_i > eps_ij`` and ``w(X_j, X_i)'b + A_j > eps_ji`` with
``eps ~ Uniform[0, 1]``, so every conditional probability is a product of
clamped linear terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .core import InputError, NetworkData, PairwiseTransform, as_direction


class ConfigError(ValueError):
    """Raised for invalid or unsupported configurations."""


class DegenerateNetworkWarning(UserWarning):
    """Realized density is numerically degenerate (almost empty or complete)."""


SUPPORTS = (
    "AllContinuous",
    "Binary1",
    "Binary1Discrete2",
    "AllDiscrete101",
    "AllDiscrete11",
)

DENSITY_LOW = 0.001
DENSITY_HIGH = 0.999

# stream ids for SeedSequence spawn keys
_POP_STREAM, _NET_STREAM, _PLAN_STREAM = 0, 1, 2

Heterogeneity = Union[Sequence[float], Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class DgpConfig:
    """Complete description of a synthetic world.

    ``beta0`` is the raw index coefficient used to generate links; only its
    direction is identified. ``heterogeneity`` is either ``(c1, c2)`` giving
    ``A_i = c1 * X_i1 + c2 * xi_i`` or a callable ``f(X, xi) -> A``.
    """

    n: int
    d: int = 3
    beta0: tuple = None
    support: str = "AllContinuous"
    heterogeneity: Heterogeneity = (0.2, 0.8)
    w: PairwiseTransform = field(default_factory=PairwiseTransform)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.d < 2:
            raise ConfigError("d must be at least 2")
        if self.support not in SUPPORTS:
            raise ConfigError(f"unknown support {self.support!r}; choose from {SUPPORTS}")
        if self.support == "Binary1Discrete2" and self.d < 2:
            raise ConfigError("Binary1Discrete2 needs d >= 2")
        beta0 = self.beta0
        if beta0 is None:
            beta0 = np.ones(self.d) / np.sqrt(self.d)
        beta0 = tuple(float(b) for b in np.asarray(beta0, dtype=float).ravel())
        if len(beta0) != self.d:
            raise ConfigError(f"beta0 has length {len(beta0)}, expected d={self.d}")
        if not any(beta0):
            raise ConfigError("beta0 must be nonzero")
        object.__setattr__(self, "beta0", beta0)
        if not callable(self.heterogeneity):
            het = tuple(float(c) for c in self.heterogeneity)
            if len(het) != 2:
                raise ConfigError("heterogeneity must be (c1, c2)")
            object.__setattr__(self, "heterogeneity", het)
        if not isinstance(self.w, PairwiseTransform):
            raise ConfigError("w must be a PairwiseTransform")

    @property
    def direction(self) -> np.ndarray:
        return as_direction(self.beta0)

    def stream(self, which: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(which,))
        return np.random.default_rng(ss)


def baseline_config(n=100, d=3, corr=0.2, w="symmetric_abs_diff", seed=0) -> DgpConfig:
    """Monte Carlo design: uniform covariates, ``A = corr*X_1 + (1-corr)*xi``."""
    return DgpConfig(
        n=n,
        d=d,
        beta0=np.ones(d) / np.sqrt(d),
        support="AllContinuous",
        heterogeneity=(corr, 1.0 - corr),
        w=PairwiseTransform(w),
        seed=seed,
    )


def idset_config(support="AllContinuous", n=1000, seed=0) -> DgpConfig:
    """Identified-set design: ``beta0 = (1,1,1)/6``, ``A = (X_1 + xi)/4``."""
    return DgpConfig(
        n=n,
        d=3,
        beta0=(1 / 6, 1 / 6, 1 / 6),
        support=support,
        heterogeneity=(0.25, 0.25),
        w=PairwiseTransform("symmetric_abs_diff"),
        seed=seed,
    )


@dataclass(frozen=True)
class Population:
    covariates: np.ndarray
    heterogeneity: np.ndarray
    xi: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return self.covariates.shape[0]


def _draw_covariates(support: str, n: int, d: int, rng) -> np.ndarray:
    grid11 = np.round(np.linspace(-0.5, 0.5, 11), 10)
    grid101 = np.round(np.linspace(-0.5, 0.5, 101), 10)
    X = np.empty((n, d))
    for h in range(d):
        if support == "AllDiscrete11":
            X[:, h] = rng.choice(grid11, size=n)
        elif support == "AllDiscrete101":
            X[:, h] = rng.choice(grid101, size=n)
        elif h == 0 and support in ("Binary1", "Binary1Discrete2"):
            X[:, h] = rng.integers(0, 2, size=n).astype(float)
        elif h == 1 and support == "Binary1Discrete2":
            X[:, h] = rng.choice(grid11, size=n)
        else:
            X[:, h] = rng.uniform(-0.5, 0.5, size=n)
    return X


def draw_population(cfg: DgpConfig, rng: np.random.Generator | None = None) -> Population:
    """Draw i.i.d. covariates and heterogeneity for ``cfg.n`` nodes."""
    if rng is None:
        rng = cfg.stream(_POP_STREAM)
    X = _draw_covariates(cfg.support, cfg.n, cfg.d, rng)
    xi = rng.uniform(-0.5, 0.5, size=cfg.n)
    if callable(cfg.heterogeneity):
        A = np.asarray(cfg.heterogeneity(X, xi), dtype=float)
    else:
        c1, c2 = cfg.heterogeneity
        A = c1 * X[:, 0] + c2 * xi
    for arr in (X, xi, A):
        arr.setflags(write=False)
    return Population(covariates=X, heterogeneity=A, xi=xi, seed=cfg.seed)


def index_matrix(covariates, cfg: DgpConfig) -> np.ndarray:
    """``delta[i, j] = w(X_i, X_j)' beta0`` (raw, unnormalized beta0)."""
    W = cfg.w.matrix(covariates)
    return W @ np.asarray(cfg.beta0)


def form_network(
    pop: Population,
    cfg: DgpConfig,
    rng: np.random.Generator | None = None,
    *,
    shared_shock: bool = False,
) -> NetworkData:
    """Realize links under bilateral consent.

    Shocks for the unordered pair ``(i, j)``, ``i < j``, occupy a fixed slot of
    the stream in row-major pair order, so any chunked generation reproduces
    the same network. ``shared_shock`` forces ``eps_ji = eps_ij`` (testing
    only).
    """
    if rng is None:
        rng = cfg.stream(_NET_STREAM)
    n = pop.n
    delta = index_matrix(pop.covariates, cfg)
    u = delta + pop.heterogeneity[:, None]  # u[i, j] = w(X_i,X_j)'b + A_i
    iu, ju = np.triu_indices(n, k=1)
    eps = rng.uniform(0.0, 1.0, size=(iu.size, 2))
    e_ij = eps[:, 0]
    e_ji = eps[:, 0] if shared_shock else eps[:, 1]
    link = (u[iu, ju] > e_ij) & (u[ju, iu] > e_ji)
    D = np.zeros((n, n), dtype=np.int8)
    D[iu, ju] = link
    D[ju, iu] = link
    net = NetworkData(adjacency=D, covariates=pop.covariates)
    dens = net.density
    if dens < DENSITY_LOW or dens > DENSITY_HIGH:
        warnings.warn(
            f"degenerate network: density {dens:.4f}; beta0 is probably mis-scaled",
            DegenerateNetworkWarning,
            stacklevel=2,
        )
    return net


def _clamp01(t):
    return np.clip(t, 0.0, 1.0)


def link_probability_exact(delta_ij, delta_ji, a_i, a_j):
    """Closed-form ``P(D_ij = 1)`` given both indices and both heterogeneities."""
    return _clamp01(np.asarray(delta_ij) + a_i) * _clamp01(np.asarray(delta_ji) + a_j)


def _clamp_antiderivative(t):
    t = np.asarray(t, dtype=float)
    return np.where(t <= 0.0, 0.0, np.where(t < 1.0, 0.5 * t * t, t - 0.5))


def expected_clamp(u, s):
    """``E[clamp(u + s*xi, 0, 1)]`` for ``xi ~ Uniform[-0.5, 0.5]``."""
    u = np.asarray(u, dtype=float)
    s = abs(float(s))
    if s == 0.0:
        return _clamp01(u)
    half = 0.5 * s
    return (_clamp_antiderivative(u + half) - _clamp_antiderivative(u - half)) / s


def _linear_heterogeneity(cfg: DgpConfig):
    if callable(cfg.heterogeneity):
        raise ConfigError(
            "closed-form popularity needs the linear heterogeneity rule (c1, c2)"
        )
    return cfg.heterogeneity


def rho_exact(x_i, a_i, x, cfg: DgpConfig):
    """Popularity of a node with ``(x_i, a_i)`` among partners of type ``x``.

    ``x`` may be a single covariate vector or an ``(m, d_x)`` stack.
    """
    c1, c2 = _linear_heterogeneity(cfg)
    beta0 = np.asarray(cfg.beta0)
    x_i = np.asarray(x_i, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != x_i.shape[-1]:
        raise InputError("covariate dimension mismatch")
    delta_i = cfg.w(x_i, x) @ beta0
    delta_k = cfg.w(x, x_i) @ beta0
    own = _clamp01(delta_i + a_i)
    partner = expected_clamp(delta_k + c1 * x[..., 0], c2)
    return own * partner


def rho_matrix(pop: Population, cfg: DgpConfig) -> np.ndarray:
    """``R[i, k] = rho_i(X_k)`` for every node pair of ``pop``."""
    c1, c2 = _linear_heterogeneity(cfg)
    delta = index_matrix(pop.covariates, cfg)
    own = _clamp01(delta + pop.heterogeneity[:, None])
    partner = expected_clamp(delta.T + c1 * pop.covariates[:, 0][None, :], c2)
    return own * partner
