"""Logical-differencing criterion over tetrads.

For an ordered pair ``(i, j)`` and partners ``k != l`` outside ``{i, j}`` the
criterion adds

    gamma(rho_i(X_k) - rho_j(X_k)) * gamma(rho_j(X_l) - rho_i(X_l))
        * 1{D_k' b <= 0} * 1{D_l' b >= 0},   D_m = w(X_i, X_m) - w(X_j, X_m).

Both factors split into a ``k`` part and an ``l`` part, and the ``k == l``
term always vanishes (a sign-preserving ``gamma`` cannot be positive at ``t``
and ``-t``), so the sum over ordered ``(k, l)`` is ``S_k(b) * S_l(b)`` with
``S_k`` and ``S_l`` single sums over partners. The compact pair table below
stores only partners with a positive weight.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import kernels
from .core import InputError, NetworkData, PairwiseTransform, as_direction


class SmoothingKind(str, enum.Enum):
    INDICATOR = "indicator"
    POSITIVE_PART = "positive_part"
    SCALED_NORMAL_CDF = "scaled_normal_cdf"

    @classmethod
    def parse(cls, value) -> "SmoothingKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "indicatorgamma": "indicator",
            "positivepart": "positive_part",
            "scalednormalcdf": "scaled_normal_cdf",
            "normal": "scaled_normal_cdf",
        }
        key = aliases.get(key.replace("_", ""), key)
        try:
            return cls(key)
        except ValueError:
            raise InputError(f"unknown smoothing kind {value!r}") from None


def gamma(kind, t):
    """One-sided sign-preserving weight: zero for ``t <= 0``."""
    kind = SmoothingKind.parse(kind)
    t = np.asarray(t, dtype=float)
    pos = np.maximum(t, 0.0)
    if kind is SmoothingKind.INDICATOR:
        out = (t > 0.0).astype(float)
    elif kind is SmoothingKind.POSITIVE_PART:
        out = pos
    else:
        # 2 * Phi(t) - 1 == erf(t / sqrt 2)
        out = erf(pos / np.sqrt(2.0))
    return out if out.ndim else float(out)


def tau_weight(kind, rho_i_at_xk, rho_j_at_xk, rho_i_at_xl, rho_j_at_xl):
    return gamma(kind, np.subtract(rho_i_at_xk, rho_j_at_xk)) * gamma(
        kind, np.subtract(rho_j_at_xl, rho_i_at_xl)
    )


def _delta(w, x_m, x_i, x_j):
    return w(x_i, x_m) - w(x_j, x_m)


def lambda_sym(x_k, x_l, x_i, x_j, w: PairwiseTransform, beta) -> int:
    beta = np.asarray(beta, dtype=float)
    lo = _dot(_delta(w, x_k, x_i, x_j), beta) <= 0.0
    hi = _dot(_delta(w, x_l, x_i, x_j), beta) >= 0.0
    return int(lo and hi)


def lambda_asym(x_k, x_l, x_i, x_j, w: PairwiseTransform, beta) -> int:
    """Indicator that all four reversed weak inequalities hold.

    Uses ``w(x_m, x_i) - w(x_m, x_j)`` alongside the usual difference, so it
    coincides with :func:`lambda_sym` whenever ``w`` is symmetric.
    """
    beta = np.asarray(beta, dtype=float)
    c1 = _dot(_delta(w, x_k, x_i, x_j), beta) <= 0.0
    c2 = _dot(w(x_k, x_i) - w(x_k, x_j), beta) <= 0.0
    c3 = _dot(_delta(w, x_l, x_i, x_j), beta) >= 0.0
    c4 = _dot(w(x_l, x_i) - w(x_l, x_j), beta) >= 0.0
    return int(c1 and c2 and c3 and c4)


def _dot(u, beta):
    # left-to-right accumulation, matching the kernels
    acc = 0.0
    for a, b in zip(np.ravel(u), np.ravel(beta)):
        acc = acc + a * b
    return acc


# ---------------------------------------------------------------------------
# Tetrad plans and the compact pair table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TetradPlan:
    """Ordered ``(i, j)`` pairs; partners range over all other ordered ``(k, l)``."""

    pairs: np.ndarray
    n: int
    seed: int | None = None

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if pairs.size and (np.any(pairs[:, 0] == pairs[:, 1]) or pairs.min() < 0 or pairs.max() >= self.n):
            raise InputError("plan pairs must be distinct node indices in range")
        pairs = pairs.copy()
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    @property
    def M(self) -> int:
        return self.pairs.shape[0]

    @property
    def normalizer(self) -> float:
        return float(self.M) * (self.n - 2) * (self.n - 3)

    @classmethod
    def sample(cls, n: int, M: int, seed=None, rng: np.random.Generator | None = None):
        """Draw ``M`` ordered pairs uniformly without replacement.

        ``M`` is capped at ``n * (n - 1)``.
        """
        if n < 4:
            raise InputError("tetrads need at least 4 nodes")
        if rng is None:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
        total = n * (n - 1)
        if M > total:
            warnings.warn(f"M={M} exceeds the {total} ordered pairs; using all of them", stacklevel=2)
        M = min(int(M), total)
        codes = rng.choice(total, size=M, replace=False)
        i = codes // (n - 1)
        r = codes % (n - 1)
        j = r + (r >= i)
        return cls(pairs=np.column_stack([i, j]), n=n, seed=seed)


@dataclass(frozen=True)
class PairTable:
    """Partners with positive weight, grouped by (i, j) pair (CSR layout).

    Pairs whose ``k`` or ``l`` block is empty contribute nothing for any
    direction and are dropped; ``normalizer`` still counts every plan pair.
    """

    k_ptr: np.ndarray
    k_u: np.ndarray
    k_u2: np.ndarray | None
    k_w: np.ndarray
    l_ptr: np.ndarray
    l_u: np.ndarray
    l_u2: np.ndarray | None
    l_w: np.ndarray
    pairs: np.ndarray
    normalizer: float
    d: int

    @property
    def n_pairs(self) -> int:
        return self.k_ptr.size - 1

    @property
    def two_sided(self) -> bool:
        return self.k_u2 is not None

    def totals(self, betas, backend=None, num_threads=1) -> np.ndarray:
        kern = kernels.get_backend(backend)
        return kern.criterion_totals(
            np.atleast_2d(betas), self.k_ptr, self.k_u, self.k_u2, self.k_w,
            self.l_ptr, self.l_u, self.l_u2, self.l_w, num_threads=num_threads,
        )

    def evaluate(self, betas, backend=None, num_threads=1) -> np.ndarray:
        """Criterion values for a ``(P, d)`` stack of directions."""
        if self.normalizer <= 0:
            raise InputError("empty tetrad plan")
        return self.totals(betas, backend, num_threads) / self.normalizer

    def __call__(self, beta) -> float:
        return float(self.evaluate(np.asarray(beta, dtype=float)[None, :])[0])


def build_pair_table(
    rho: np.ndarray,
    W: np.ndarray,
    plan: TetradPlan,
    kind=SmoothingKind.SCALED_NORMAL_CDF,
    symmetric: bool = True,
    chunk: int = 256,
) -> PairTable:
    """Compact the tetrad sum for ``plan``.

    ``rho[i, k]`` is node ``i``'s popularity among partners of ``k``'s type and
    ``W[i, k] = w(X_i, X_k)``.
    """
    kind = SmoothingKind.parse(kind)
    if plan.M == 0:
        raise InputError("empty tetrad plan")
    n = rho.shape[0]
    if W.shape[:2] != (n, n) or plan.n != n:
        raise InputError("rho, W and plan disagree on the number of nodes")
    d = W.shape[2]
    Wt = None if symmetric else np.ascontiguousarray(W.transpose(1, 0, 2))
    ks, ls = [], []
    kept = []
    k_counts, l_counts = [], []
    for s in range(0, plan.M, chunk):
        ij = plan.pairs[s : s + chunk]
        i, j = ij[:, 0], ij[:, 1]
        t = rho[i] - rho[j]
        a = gamma(kind, t)
        b = gamma(kind, -t)
        rows = np.arange(ij.shape[0])
        for arr in (a, b):
            arr[rows, i] = 0.0
            arr[rows, j] = 0.0
        dlt = W[i] - W[j]
        dlt2 = None if symmetric else Wt[i] - Wt[j]
        ka = a > 0.0
        lb = b > 0.0
        nk = ka.sum(axis=1)
        nl = lb.sum(axis=1)
        live = (nk > 0) & (nl > 0)
        ka &= live[:, None]
        lb &= live[:, None]
        kept.append(ij[live])
        k_counts.append(nk[live])
        l_counts.append(nl[live])
        ks.append((dlt[ka], None if symmetric else dlt2[ka], a[ka]))
        ls.append((-dlt[lb], None if symmetric else -dlt2[lb], b[lb]))

    def _stack(parts, counts):
        ptr = np.concatenate([[0], np.cumsum(np.concatenate(counts))]).astype(np.int64)
        u = np.ascontiguousarray(np.concatenate([p[0] for p in parts]).reshape(-1, d))
        u2 = None
        if not symmetric:
            u2 = np.ascontiguousarray(np.concatenate([p[1] for p in parts]).reshape(-1, d))
        w = np.ascontiguousarray(np.concatenate([p[2] for p in parts]))
        for arr in (ptr, u, w) + ((u2,) if u2 is not None else ()):
            arr.setflags(write=False)
        return ptr, u, u2, w

    k_ptr, k_u, k_u2, k_w = _stack(ks, k_counts)
    l_ptr, l_u, l_u2, l_w = _stack(ls, l_counts)
    pairs = np.concatenate(kept).reshape(-1, 2)
    return PairTable(k_ptr, k_u, k_u2, k_w, l_ptr, l_u, l_u2, l_w, pairs, plan.normalizer, d)


def pairwise_matrix(net: NetworkData, w: PairwiseTransform | None) -> np.ndarray:
    if net.pairwise is not None:
        return np.asarray(net.pairwise)
    if w is None:
        raise InputError("need a pairwise transform or precomputed pairwise regressors")
    return w.matrix(net.covariates)


def sample_criterion(beta, rho_hats, net: NetworkData, plan: TetradPlan, w=None,
                     kind=SmoothingKind.SCALED_NORMAL_CDF, backend=None):
    """Sample criterion at one direction (or a stack of directions).

    ``rho_hats`` is either an ``(n, n)`` matrix of fitted popularities
    ``rho_hat_i(X_k)`` or a list of :class:`~ntunet.sieve.RhoEstimate`.
    """
    if plan.M == 0:
        raise InputError("empty tetrad plan")
    R = _as_rho_matrix(rho_hats, net)
    symmetric = True if w is None else bool(w.symmetric)
    table = build_pair_table(R, pairwise_matrix(net, w), plan, kind, symmetric)
    beta = np.asarray(beta, dtype=float)
    vals = table.evaluate(np.atleast_2d(beta), backend=backend)
    return float(vals[0]) if beta.ndim == 1 else vals


def _as_rho_matrix(rho_hats, net):
    if isinstance(rho_hats, np.ndarray):
        return rho_hats
    from .sieve import rho_hat_matrix

    return rho_hat_matrix(list(rho_hats), net.covariates)


def criterion_brute_force(beta, rho, W, plan: TetradPlan, kind, symmetric=True) -> float:
    """Direct quadruple loop over tetrads; an independent check for tests."""
    kind = SmoothingKind.parse(kind)
    beta = as_direction(beta)
    n = rho.shape[0]
    total = 0.0
    for i, j in plan.pairs:
        for k in range(n):
            if k in (i, j):
                continue
            for l in range(n):
                if l in (i, j, k):
                    continue
                tw = tau_weight(kind, rho[i, k], rho[j, k], rho[i, l], rho[j, l])
                if tw == 0.0:
                    continue
                c = (_dot(W[i, k] - W[j, k], beta) <= 0.0) and (_dot(W[i, l] - W[j, l], beta) >= 0.0)
                if not symmetric:
                    c = c and (_dot(W[k, i] - W[k, j], beta) <= 0.0) and (
                        _dot(W[l, i] - W[l, j], beta) >= 0.0
                    )
                total += tw * c
    return total / plan.normalizer
