"""Synthetic village-style dataset for exercising the real-data workflow.

Households have a wealth level and a hidden location; dyads carry the walking
distance and an ordinal kinship tie (0-3). Links follow the bilateral-consent
rule with index ``(|ln wealth_i - ln wealth_j|, ln distance, tie)' b`` and are
reported as mentions (none / unilateral / bilateral). A handful of households
have a missing wealth value or missing distances so that ingestion has
something to drop.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

FIXTURE_BETA = (-0.03, -0.12, 0.085)
N_HOUSEHOLDS = 119
N_INCOMPLETE = 5


def generate_fixture(outdir, seed: int = 2024, n: int = N_HOUSEHOLDS, n_incomplete: int = N_INCOMPLETE):
    """Write ``nodes.csv`` and ``dyads.csv`` to ``outdir``; returns their paths."""
    rng = np.random.default_rng(seed)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    wealth = np.round(np.exp(rng.normal(11.0, 0.9, size=n)), 0)
    loc = rng.uniform(0.0, 2.0, size=(n, 2))  # km
    dist = np.sqrt(((loc[:, None, :] - loc[None, :, :]) ** 2).sum(-1))
    dist = np.round(np.maximum(dist, 0.01), 3)
    tie = np.zeros((n, n), dtype=int)
    iu, ju = np.triu_indices(n, k=1)
    t = rng.choice(4, size=iu.size, p=[0.82, 0.08, 0.06, 0.04])
    tie[iu, ju] = t
    tie[ju, iu] = t

    lw = np.log(wealth)
    W = np.stack([np.abs(lw[:, None] - lw[None, :]), np.log(dist), tie.astype(float)], axis=-1)
    idx = W @ np.asarray(FIXTURE_BETA)
    A = 0.3 + 0.05 * (lw - lw.mean()) + 0.1 * rng.uniform(-0.5, 0.5, size=n)
    u = idx + A[:, None]
    eps = rng.uniform(size=(iu.size, 2))
    want_ij = u[iu, ju] > eps[:, 0]
    want_ji = u[ju, iu] > eps[:, 1]
    # a mention records at least one side reporting the relationship
    mention = np.where(want_ij & want_ji, "bilateral", "none").astype(object)
    one_sided = (want_ij ^ want_ji) & (rng.uniform(size=iu.size) < 0.15)
    mention[one_sided] = "unilateral"

    bad = rng.choice(n, size=n_incomplete, replace=False)
    no_wealth = set(bad[: (n_incomplete + 1) // 2].tolist())
    no_dist = set(bad[(n_incomplete + 1) // 2 :].tolist())
    ids = [f"H{k + 1:03d}" for k in range(n)]

    nodes = outdir / "nodes.csv"
    with open(nodes, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["id", "wealth"])
        for k in range(n):
            wr.writerow([ids[k], "" if k in no_wealth else f"{wealth[k]:.0f}"])
    dyads = outdir / "dyads.csv"
    with open(dyads, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["i", "j", "distance", "tie", "link"])
        for p, (a, b) in enumerate(zip(iu, ju)):
            missing = (a in no_dist or b in no_dist) and rng.uniform() < 0.5
            d = "" if missing else f"{dist[a, b]:.3f}"
            wr.writerow([ids[a], ids[b], d, int(tie[a, b]), mention[p]])
    return nodes, dyads


def fixture_paths():
    """Paths of the bundled fixture files."""
    base = Path(__file__).parent / "data"
    return base / "nodes.csv", base / "dyads.csv"
