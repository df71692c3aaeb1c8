"""Identified set from the population criterion with exact popularity functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import InputError, angles_to_direction, angular_distance, direction_to_angles
from .criterion import PairTable, SmoothingKind, TetradPlan, build_pair_table
from .dgp import DgpConfig, Population, draw_population, rho_matrix


def population_table(cfg: DgpConfig, pop: Population, plan: TetradPlan,
                     kind=SmoothingKind.INDICATOR) -> PairTable:
    """Pair table with exact popularities ``rho_exact`` in place of estimates."""
    R = rho_matrix(pop, cfg)
    W = cfg.w.matrix(pop.covariates)
    return build_pair_table(R, W, plan, kind, symmetric=cfg.w.symmetric)


def population_criterion(beta, cfg: DgpConfig, pop: Population, plan: TetradPlan,
                         kind=SmoothingKind.INDICATOR, backend=None):
    table = population_table(cfg, pop, plan, kind)
    beta = np.asarray(beta, dtype=float)
    vals = table.evaluate(np.atleast_2d(beta), backend=backend)
    return float(vals[0]) if beta.ndim == 1 else vals


TOL_FLOOR = 1e-9


def membership_tolerance(values, rel_tol: float = 0.0) -> float:
    """``max(1e-9, rel_tol * range)``.

    The default keeps only the absolute floor, which sits about one tetrad
    count below the resolution of an ``N = 1000, M = 10000`` criterion, so
    members are the grid points with numerically zero criterion. A relative
    term widens the region in proportion to the criterion's overall scale.
    """
    if rel_tol < 0:
        raise InputError("rel_tol must be nonnegative")
    values = np.asarray(values, dtype=float)
    return max(TOL_FLOOR, rel_tol * float(values.max() - values.min()))


@dataclass
class IdSetGrid:
    """Criterion values on a latitude/longitude grid of ``S^2``.

    ``theta1`` indexes rows and ``theta2`` columns; ``theta2`` is wrapped into
    ``[-pi, pi)``, so columns need not be sorted.
    """

    theta1: np.ndarray
    theta2: np.ndarray
    values: np.ndarray
    member: np.ndarray
    tol: float
    support: str
    resolution_deg: float
    anchor: np.ndarray | None = None

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    def member_angles(self) -> np.ndarray:
        r, c = np.nonzero(self.member)
        return np.column_stack([self.theta1[r], self.theta2[c]])

    def member_directions(self) -> np.ndarray:
        return angles_to_direction(self.member_angles())

    def contains(self, beta) -> bool:
        """Whether the grid point nearest to ``beta`` is a member."""
        beta = np.asarray(beta, dtype=float)
        beta = beta / np.linalg.norm(beta)
        T1, T2 = np.meshgrid(self.theta1, self.theta2, indexing="ij")
        dirs = angles_to_direction(np.stack([T1, T2], axis=-1))
        dist = angular_distance(dirs, np.broadcast_to(beta, dirs.shape))
        k = np.unravel_index(np.argmin(dist), dist.shape)
        return bool(self.member[k])

    def angular_diameter(self, chunk: int = 2048) -> float:
        """Largest great-circle distance (radians) between two members."""
        B = self.member_directions()
        best = 0.0
        for s in range(0, B.shape[0], chunk):
            dots = np.clip(B[s : s + chunk] @ B.T, -1.0, 1.0)
            best = max(best, float(np.arccos(dots.min())))
        return best

    def area(self) -> float:
        """Solid angle (steradians) of the member cells."""
        h = np.deg2rad(self.resolution_deg)
        r, _ = np.nonzero(self.member)
        return float(np.sum(np.cos(self.theta1[r])) * h * h)

    def bounding_rectangle(self) -> dict:
        ang = self.member_angles()
        dirs = angles_to_direction(ang)
        t2 = np.sort(ang[:, 1])
        # smallest arc covering the member longitudes
        if t2.size > 1:
            gaps = np.diff(np.concatenate([t2, [t2[0] + 2 * np.pi]]))
            g = int(np.argmax(gaps))
            lo2 = t2[(g + 1) % t2.size]
            hi2 = t2[g] if g + 1 < t2.size else t2[g]
            if hi2 < lo2:
                hi2 += 2 * np.pi
        else:
            lo2 = hi2 = t2[0]
        return {
            "theta1_min": float(ang[:, 0].min()),
            "theta1_max": float(ang[:, 0].max()),
            "theta2_min": float(lo2),
            "theta2_max": float(hi2),
            "beta_lower": dirs.min(axis=0),
            "beta_upper": dirs.max(axis=0),
            "n_members": int(ang.shape[0]),
            "area_sr": self.area(),
            "diameter_deg": float(np.rad2deg(self.angular_diameter())),
        }


def _rows(anchor1: float, h: float) -> np.ndarray:
    lo = anchor1 - np.floor((anchor1 + np.pi / 2) / h + 1e-9) * h
    n = int(np.floor((np.pi / 2 - lo) / h + 1e-9)) + 1
    return lo + h * np.arange(n)


def compute_idset(
    cfg: DgpConfig,
    N: int | None = None,
    M: int = 10_000,
    resolution_deg: float = 1.0,
    *,
    kind=SmoothingKind.INDICATOR,
    anchor="beta0",
    rel_tol: float = 0.0,
    plan_seed=None,
    backend=None,
    num_threads: int = 1,
) -> IdSetGrid:
    """Evaluate the population criterion on a full angle grid (``d = 3``).

    ``anchor="beta0"`` offsets the grid so the true direction is a node;
    ``anchor=None`` uses the plain grid through ``(0, 0)``. Membership is
    ``value <= min + membership_tolerance(values, rel_tol)``.
    """
    if cfg.d != 3:
        raise InputError("angle grids are implemented for d = 3")
    if N is not None and N != cfg.n:
        cfg = DgpConfig(n=N, d=cfg.d, beta0=cfg.beta0, support=cfg.support,
                        heterogeneity=cfg.heterogeneity, w=cfg.w, seed=cfg.seed)
    L = int(round(360.0 / resolution_deg))
    if not np.isclose(L * resolution_deg, 360.0):
        raise InputError("resolution must divide 360 degrees")
    h = 2.0 * np.pi / L
    if anchor is None:
        a1, a2 = 0.0, 0.0
        anchor_arr = None
    else:
        beta_a = cfg.direction if isinstance(anchor, str) else np.asarray(anchor, dtype=float)
        a1, a2 = direction_to_angles(beta_a / np.linalg.norm(beta_a))
        anchor_arr = np.array([a1, a2])
    theta1 = _rows(a1, h)
    theta0 = a2 - np.pi
    cols = theta0 + h * np.arange(L + 1)

    pop = draw_population(cfg)
    plan = TetradPlan.sample(cfg.n, M, seed=cfg.seed if plan_seed is None else plan_seed)
    table = population_table(cfg, pop, plan, kind)
    T1, T2 = np.meshgrid(theta1, cols, indexing="ij")
    grid_betas = angles_to_direction(np.stack([T1, T2], axis=-1))
    kern = kernels.get_backend(backend)
    if table.two_sided:
        totals = np.empty(T1.shape)
        for r in range(theta1.size):
            totals[r] = table.totals(grid_betas[r], backend=backend, num_threads=num_threads)
    else:
        totals = kern.sweep_totals_s2(theta1, theta0, L, grid_betas, table.k_ptr, table.k_u,
                                      table.k_w, table.l_ptr, table.l_u, table.l_w,
                                      num_threads=num_threads)
    values = totals[:, :L] / table.normalizer
    tol = membership_tolerance(values, rel_tol)
    member = values <= values.min() + tol
    theta2 = np.mod(cols[:L] + np.pi, 2 * np.pi) - np.pi
    return IdSetGrid(theta1=theta1, theta2=theta2, values=values, member=member, tol=tol,
                     support=cfg.support, resolution_deg=float(resolution_deg), anchor=anchor_arr)
