"""First-stage popularity estimates by quadratic-spline series regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, NetworkData


@dataclass(frozen=True)
class SplineBasis:
    """Additive quadratic spline with one interior knot per coordinate.

    Columns are ``1`` followed by ``x_h, x_h**2, max(x_h - m_h, 0)**2`` for
    each coordinate ``h``, where ``m_h`` is the lower sample median.
    """

    knots: np.ndarray

    @property
    def d_x(self) -> int:
        return self.knots.size

    @property
    def size(self) -> int:
        return 1 + 3 * self.d_x

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :] if x.size == self.d_x else x[:, None]
        if x.shape[-1] != self.d_x:
            raise InputError(f"expected {self.d_x} covariates, got {x.shape[-1]}")
        cols = [np.ones(x.shape[0])]
        for h in range(self.d_x):
            xh = x[:, h]
            cols += [xh, xh * xh, np.maximum(xh - self.knots[h], 0.0) ** 2]
        return np.column_stack(cols)


def lower_median(values) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    return float(v[(v.size - 1) // 2])


def build_basis(covariates) -> SplineBasis:
    X = np.asarray(covariates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d_x = X.shape
    if n < 2 * (1 + 3 * d_x):
        raise InputError(f"need at least {2 * (1 + 3 * d_x)} rows to build the basis, got {n}")
    knots = np.array([lower_median(X[:, h]) for h in range(d_x)])
    knots.setflags(write=False)
    return SplineBasis(knots=knots)


@dataclass(frozen=True)
class RhoEstimate:
    node: int
    coefficients: np.ndarray
    basis: SplineBasis
    rss: float
    rank: int

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.basis.size

    def raw(self, x) -> np.ndarray:
        return self.basis(x) @ self.coefficients


def fit_rho(i: int, net: NetworkData, basis: SplineBasis, design=None) -> RhoEstimate:
    """Least-squares fit of ``D_ik`` on the basis at ``X_k``, ``k != i``.

    Uses an SVD-based solver, so rank-deficient designs (discrete covariates)
    return the minimum-norm solution and are flagged via ``rank``.
    """
    if design is None:
        design = basis(net.covariates)
    n = net.n
    if n - 1 < basis.size:
        raise InputError("not enough partners to fit the popularity function")
    keep = np.arange(n) != i
    Z = design[keep]
    y = net.adjacency[i, keep].astype(float)
    coef, _, rank, _ = np.linalg.lstsq(Z, y, rcond=None)
    resid = y - Z @ coef
    coef.setflags(write=False)
    return RhoEstimate(node=i, coefficients=coef, basis=basis, rss=float(resid @ resid), rank=int(rank))


def fit_all(net: NetworkData, basis: SplineBasis | None = None) -> list[RhoEstimate]:
    if basis is None:
        basis = build_basis(net.covariates)
    design = basis(net.covariates)
    return [fit_rho(i, net, basis, design) for i in range(net.n)]


def predict_rho(est: RhoEstimate, x) -> np.ndarray | float:
    """Fitted popularity at ``x``, clamped to ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and x.size == est.basis.d_x
    out = np.clip(est.raw(x), 0.0, 1.0)
    return float(out[0]) if single else out


def rho_hat_matrix(estimates, covariates) -> np.ndarray:
    """``R[i, k] = rho_hat_i(X_k)`` stacked for all fitted nodes."""
    basis = estimates[0].basis
    Z = basis(covariates)
    C = np.stack([e.coefficients for e in estimates])
    return np.clip(C @ Z.T, 0.0, 1.0)
