"""Pure numpy implementations of the criterion kernels.

Both kernels consume the compact pair table built by
:func:`ntunet.criterion.build_pair_table`: for every (i, j) pair a block of
"k" entries and a block of "l" entries, each entry carrying a weight and one or
two constraint vectors ``u`` with the entry active iff ``u . beta <= 0`` for
all of its vectors. The per-pair contribution is ``S_k(beta) * S_l(beta)``.

Dot products are evaluated left to right without fused multiply-add so that
boundary ties resolve identically here and in the compiled backend.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_CHUNK_ELEMS = 2_000_000
_NEAR_ONE = 1e-9


def _dots(u, betas):
    """``u @ betas.T`` accumulated coordinate by coordinate."""
    acc = u[:, 0, None] * betas[None, :, 0]
    for h in range(1, u.shape[1]):
        acc = acc + u[:, h, None] * betas[None, :, h]
    return acc


def _side_sums(ptr, u, u2, w, betas):
    active = _dots(u, betas) <= 0.0
    if u2 is not None:
        active &= _dots(u2, betas) <= 0.0
    contrib = np.where(active, w[:, None], 0.0)
    return np.add.reduceat(contrib, ptr[:-1], axis=0)


def criterion_totals(betas, k_ptr, k_u, k_u2, k_w, l_ptr, l_u, l_u2, l_w, num_threads=1):
    """Unnormalized criterion ``sum_p S_k * S_l`` for each row of ``betas``."""
    betas = np.ascontiguousarray(betas, dtype=float)
    P = betas.shape[0]
    out = np.zeros(P)
    n_pairs = k_ptr.size - 1
    if n_pairs == 0 or P == 0:
        return out
    E = max(k_w.size, l_w.size, 1)
    step = max(1, _CHUNK_ELEMS // E)
    for s in range(0, P, step):
        b = betas[s : s + step]
        sk = _side_sums(k_ptr, k_u, k_u2, k_w, b)
        sl = _side_sums(l_ptr, l_u, l_u2, l_w, b)
        out[s : s + step] = np.sum(sk * sl, axis=0)
    return out


def _row_side(theta1, theta0, L, row_betas, ptr, u, w, n_pairs):
    """Per-pair active weight at every column of one latitude row."""
    J = L + 1
    h = 2.0 * np.pi / L
    pair = np.repeat(np.arange(n_pairs), np.diff(ptr))
    E = w.size
    S = np.zeros((n_pairs, J))
    if E == 0:
        return S

    def exact(idx, cols):
        b = row_betas[cols]
        f = u[idx, 0] * b[:, 0] + u[idx, 1] * b[:, 1] + u[idx, 2] * b[:, 2]
        return f <= 0.0

    # last column duplicates the first direction up to rounding: always exact
    last = row_betas[L]
    f_last = u[:, 0] * last[0] + u[:, 1] * last[1] + u[:, 2] * last[2]
    S[:, L] = np.bincount(pair, weights=np.where(f_last <= 0.0, w, 0.0), minlength=n_pairs)

    r = np.hypot(u[:, 0], u[:, 1]) * np.cos(theta1)
    C = u[:, 2] * np.sin(theta1)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = -C / r
    zero_r = (r == 0.0) | (np.cos(theta1) <= 0.0)
    c = np.where(zero_r, 0.0, c)
    near = zero_r | (np.abs(np.abs(c) - 1.0) < _NEAR_ONE)
    full = ~near & (c >= 1.0)
    arc = ~near & (np.abs(c) < 1.0)

    diff = np.zeros(n_pairs * (L + 1))
    point = np.zeros(n_pairs * L)

    # entries active on the whole row
    idx = np.nonzero(full)[0]
    np.add.at(diff, pair[idx] * (L + 1), w[idx])
    np.add.at(diff, pair[idx] * (L + 1) + L, -w[idx])

    # arc entries: cos(theta - phi) <= c  <=>  theta - phi in [alpha, 2pi - alpha]
    idx = np.nonzero(arc)[0]
    if idx.size:
        phi = np.arctan2(u[idx, 1], u[idx, 0])
        alpha = np.arccos(c[idx])
        ta = (phi + alpha - theta0) / h
        tb = ta + (2.0 * np.pi - 2.0 * alpha) / h
        ja = np.ceil(ta).astype(np.int64)
        jb = np.floor(tb).astype(np.int64)
        count = np.clip(jb - ja + 1, 0, L)
        start = np.mod(ja, L)
        stop = start + count
        p_i = pair[idx]
        wi = w[idx]
        base = p_i * (L + 1)
        wrap = stop > L
        np.add.at(diff, base + start, wi)
        np.add.at(diff, base + np.where(wrap, L, stop), -wi)
        np.add.at(diff, base[wrap], wi[wrap])
        np.add.at(diff, base[wrap] + (stop[wrap] - L), -wi[wrap])

        # resolve the columns adjacent to both arc ends exactly
        cand = np.stack([ja - 1, ja, jb, jb + 1], axis=1)
        cand = np.mod(cand, L)
        cand_sorted = np.sort(cand, axis=1)
        first = np.ones_like(cand_sorted, dtype=bool)
        first[:, 1:] = cand_sorted[:, 1:] != cand_sorted[:, :-1]
        rows = np.broadcast_to(np.arange(idx.size)[:, None], cand.shape)[first]
        cols = cand_sorted[first]
        pred = np.mod(cols - start[rows], L) < count[rows]
        truth = exact(idx[rows], cols)
        delta = truth.astype(float) - pred.astype(float)
        nz = delta != 0.0
        np.add.at(point, p_i[rows[nz]] * L + cols[nz], delta[nz] * wi[rows[nz]])

    # ill-conditioned entries: evaluate every column
    idx = np.nonzero(near)[0]
    if idx.size:
        cols = np.arange(L)
        b = row_betas[:L]
        f = (
            u[idx, 0, None] * b[None, :, 0]
            + u[idx, 1, None] * b[None, :, 1]
            + u[idx, 2, None] * b[None, :, 2]
        )
        contrib = np.where(f <= 0.0, w[idx, None], 0.0)
        flat = (pair[idx, None] * L + cols[None, :]).ravel()
        np.add.at(point, flat, contrib.ravel())

    dense = np.cumsum(diff.reshape(n_pairs, L + 1), axis=1)[:, :L]
    S[:, :L] = dense + point.reshape(n_pairs, L)
    return S


def sweep_totals_s2(
    theta1, theta0, L, grid_betas, k_ptr, k_u, k_w, l_ptr, l_u, l_w, num_threads=1
):
    """Unnormalized criterion on a full-circle latitude/longitude grid (d = 3).

    ``grid_betas[r, j]`` is the direction at ``(theta1[r], theta0 + j*2pi/L)``
    for ``j = 0..L``. Only single-vector (symmetric) entries are supported.
    """
    theta1 = np.asarray(theta1, dtype=float)
    n_pairs = k_ptr.size - 1
    out = np.zeros((theta1.size, L + 1))
    if n_pairs == 0:
        return out
    for r, t1 in enumerate(theta1):
        sk = _row_side(t1, theta0, L, grid_betas[r], k_ptr, k_u, k_w, n_pairs)
        sl = _row_side(t1, theta0, L, grid_betas[r], l_ptr, l_u, l_w, n_pairs)
        out[r] = np.sum(sk * sl, axis=0)
    return out
