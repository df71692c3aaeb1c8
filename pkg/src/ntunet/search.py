"""Nested-rectangle grid search over the angle parameterization of the sphere.

Each round evaluates a ``G^(d-1)`` grid on the current angle box, keeps every
point within a slack of the round minimum, pads the kept region by a margin of
grid cells and shrinks the box to the padded bounding box. The objective is
piecewise constant, so whole plateaus of near-minimal points are kept rather
than a single argmin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import InputError, NumericError, angle_domain, angles_to_direction


@dataclass(frozen=True)
class SearchConfig:
    G: int = 9
    slack: float = 0.05
    floor: float = 1e-9
    margin: int = 1
    rounds: int = 20
    tol: float = 1e-3

    def __post_init__(self):
        if int(self.G) < 3:
            raise InputError("G must be at least 3")
        if int(self.rounds) < 1:
            raise InputError("rounds must be at least 1")
        if self.slack < 0 or self.floor < 0 or self.margin < 0 or self.tol < 0:
            raise InputError("slack, floor, margin and tol must be nonnegative")


@dataclass(frozen=True)
class AngleBox:
    """Per-angle bounds.

    The last (periodic) angle may run past ``pi`` when the kept region
    straddles the seam; directions are unaffected.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).copy()
        hi = np.asarray(self.upper, dtype=float).copy()
        if lo.shape != hi.shape or np.any(lo > hi):
            raise InputError("box bounds must satisfy lower <= upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def full(cls, d: int) -> "AngleBox":
        return cls(*angle_domain(d))

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def axes(self, G: int) -> list[np.ndarray]:
        return [np.linspace(a, b, G) for a, b in zip(self.lower, self.upper)]


@dataclass
class EstimateResult:
    theta_set: np.ndarray
    values: np.ndarray
    beta_lower: np.ndarray
    beta_upper: np.ndarray
    beta_mid: np.ndarray
    min_value: float
    evaluations: int
    boxes: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    @property
    def beta_set(self) -> np.ndarray:
        return angles_to_direction(self.theta_set)


def extract_box(result_or_thetas):
    """Coordinate-wise ``(lower, upper, mid)`` of the kept directions."""
    thetas = getattr(result_or_thetas, "theta_set", result_or_thetas)
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size == 0:
        raise RuntimeError("empty minimizing set")
    betas = angles_to_direction(np.atleast_2d(thetas))
    return _box_of(betas)


def _box_of(betas):
    lo = betas.min(axis=0)
    hi = betas.max(axis=0)
    return lo, hi, (lo + hi) / 2.0


def _circular_cover(idx: np.ndarray, G: int) -> tuple[int, int]:
    """Smallest arc of the ``G - 1`` distinct periodic nodes covering ``idx``.

    Returns unwrapped index bounds ``(a, b)`` with ``a <= b``; ``b`` may exceed
    ``G - 1``.
    """
    P = G - 1
    pts = np.unique(np.mod(idx, P))
    if pts.size == 1:
        return int(pts[0]), int(pts[0])
    gaps = np.diff(np.concatenate([pts, [pts[0] + P]]))
    g = int(np.argmax(gaps))
    start = int(pts[(g + 1) % pts.size])
    end = int(pts[g])
    if end < start:
        end += P
    return start, end


def _evaluate(objective, betas, batched):
    if batched:
        vals = np.asarray(objective(betas), dtype=float).reshape(-1)
    else:
        vals = np.array([float(objective(b)) for b in betas])
    if vals.shape[0] != betas.shape[0]:
        raise NumericError("objective returned the wrong number of values")
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        raise NumericError(f"objective is not finite at beta={betas[bad].tolist()}: {vals[bad]}")
    return vals


def minimize(
    objective: Callable,
    d: int,
    cfg: SearchConfig | None = None,
    *,
    batched: bool = False,
    box: AngleBox | None = None,
) -> EstimateResult:
    """Minimize ``objective`` over ``S^{d-1}``.

    Parameters
    ----------
    objective : callable
        ``beta -> float``, or ``(P, d) -> (P,)`` when ``batched``.
    d : int
        Dimension of ``beta``.
    """
    cfg = cfg or SearchConfig()
    if d < 2:
        raise InputError("need d >= 2")
    G = int(cfg.G)
    box = box or AngleBox.full(d)
    period = 2.0 * np.pi
    boxes = [box]
    evaluations = 0
    kept_theta = kept_vals = None
    for _ in range(int(cfg.rounds)):
        axes = box.axes(G)
        mesh = np.array(list(itertools.product(*axes)))
        idx = np.array(list(itertools.product(range(G), repeat=d - 1)))
        vals = _evaluate(objective, angles_to_direction(mesh), batched)
        evaluations += vals.size
        vmin, vmax = float(vals.min()), float(vals.max())
        keep = vals <= vmin + cfg.slack * (vmax - vmin) + cfg.floor
        kept_theta, kept_vals = mesh[keep], vals[keep]
        kidx = idx[keep]
        lo = box.lower.copy()
        hi = box.upper.copy()
        step = box.widths / (G - 1)
        # at a pole (some earlier angle at +-pi/2) the later angles are free and
        # must not pin the box along those axes
        pole = np.abs(np.cos(kept_theta)) < 1e-12
        for a in range(d - 1):
            free = np.any(pole[:, :a], axis=1)
            if np.all(free):
                continue
            ka = kidx[~free, a]
            if a == d - 2 and box.widths[a] >= period - 1e-12:
                s, e = _circular_cover(ka, G)
                s, e = s - cfg.margin, e + cfg.margin
                if e - s >= G - 1:
                    continue  # still the whole circle
                lo[a] = box.lower[a] + s * step[a]
                hi[a] = box.lower[a] + e * step[a]
            else:
                s = max(int(ka.min()) - cfg.margin, 0)
                e = min(int(ka.max()) + cfg.margin, G - 1)
                lo[a] = box.lower[a] + s * step[a]
                hi[a] = box.lower[a] + e * step[a]
        new = AngleBox(lo, hi)
        if np.array_equal(new.lower, box.lower) and np.array_equal(new.upper, box.upper):
            break
        box = new
        boxes.append(box)
        if float(np.max(box.widths)) < cfg.tol:
            break
    lo_b, hi_b, mid_b = _box_of(angles_to_direction(kept_theta))
    return EstimateResult(
        theta_set=kept_theta,
        values=kept_vals,
        beta_lower=lo_b,
        beta_upper=hi_b,
        beta_mid=mid_b,
        min_value=float(kept_vals.min()),
        evaluations=evaluations,
        boxes=boxes,
        manifest={"search": {k: getattr(cfg, k) for k in ("G", "slack", "floor", "margin", "rounds", "tol")}},
    )
