"""Reading node and dyad tables into :class:`NetworkData` with a regressor recipe."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core import InputError, NetworkData


class DataError(InputError):
    """Input data violates the dataset contract."""


MISSING = {"", "na", "nan", "null", "none", "."}

# ---------------------------------------------------------------------------
# Link rules
# ---------------------------------------------------------------------------

_MENTION_TOKENS = {
    "none": 0,
    "no": 0,
    "not mentioned": 0,
    "unilateral": 1,
    "unilaterally mentioned": 1,
    "bilateral": 1,
    "bilaterally mentioned": 1,
}


def _binary_link(value: str) -> int:
    v = value.strip()
    try:
        x = float(v)
    except ValueError:
        raise DataError(f"link value {value!r} is not 0/1") from None
    if x not in (0.0, 1.0):
        raise DataError(f"link value {value!r} is not 0/1")
    return int(x)


def _any_mention_link(value: str) -> int:
    """Unilateral or bilateral mention counts as a link."""
    v = value.strip().lower()
    if v in _MENTION_TOKENS:
        return _MENTION_TOKENS[v]
    try:
        x = float(v)
    except ValueError:
        raise DataError(f"unrecognised mention value {value!r}") from None
    if x < 0 or x != int(x):
        raise DataError(f"mention code {value!r} must be a nonnegative integer")
    return int(x > 0)


LINK_RULES = {"binary": _binary_link, "any_mention": _any_mention_link}

# ---------------------------------------------------------------------------
# Recipe
# ---------------------------------------------------------------------------

RECIPE_KINDS = ("abs_log_diff", "log_pair_value", "pair_value")


@dataclass(frozen=True)
class RecipeItem:
    kind: str
    column: str

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise InputError(f"unknown regressor constructor {self.kind!r}; choose from {RECIPE_KINDS}")

    @property
    def label(self) -> str:
        return f"{self.kind}({self.column})"

    @property
    def node_level(self) -> bool:
        return self.kind == "abs_log_diff"

    @classmethod
    def parse(cls, item) -> "RecipeItem":
        if isinstance(item, RecipeItem):
            return item
        if isinstance(item, dict):
            if set(item) != {"kind", "column"}:
                raise InputError(f"recipe entries need exactly 'kind' and 'column', got {sorted(item)}")
            return cls(item["kind"], item["column"])
        text = str(item).strip()
        if not text.endswith(")") or "(" not in text:
            raise InputError(f"recipe entry {item!r} must look like kind(column)")
        kind, col = text[:-1].split("(", 1)
        return cls(kind.strip(), col.strip())


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def _read_rows(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise DataError(f"{path}: missing header row")
    rows = list(reader)
    return [f.strip() for f in reader.fieldnames], rows


def _num(value) -> float:
    if value is None or value.strip().lower() in MISSING:
        return math.nan
    try:
        return float(value)
    except ValueError:
        raise DataError(f"non-numeric value {value!r}") from None


@dataclass
class DyadDataset:
    """Node table, pairwise values and links keyed by node id."""

    node_ids: list
    node_columns: dict
    pair_columns: dict  # name -> {(a, b): value} with a < b in id order
    links: dict  # (a, b) -> 0/1
    dropped: list = field(default_factory=list)

    def to_network(self, recipe, first_stage_columns=None, pair_means=False) -> tuple[NetworkData, list[str]]:
        """Apply ``recipe`` and build the network.

        First-stage covariates default to the node-level columns the recipe
        uses (logged for ``abs_log_diff``). ``pair_means`` adds the per-node
        mean of every pairwise-only regressor (experimental).
        """
        recipe = [RecipeItem.parse(r) for r in recipe]
        if not recipe:
            raise InputError("recipe must contain at least one regressor")
        ids = self.node_ids
        n = len(ids)
        pos = {a: k for k, a in enumerate(ids)}
        W = np.zeros((n, n, len(recipe)))
        for h, item in enumerate(recipe):
            if item.node_level:
                x = self._log_column(item.column)
                W[:, :, h] = np.abs(x[:, None] - x[None, :])
            else:
                M = self._pair_matrix(item.column, pos)
                if item.kind == "log_pair_value":
                    off = ~np.eye(n, dtype=bool)
                    if np.any(M[off] <= 0):
                        raise DataError(f"log of non-positive pair value in {item.column!r}")
                    with np.errstate(divide="ignore"):
                        M = np.where(off, np.log(np.where(off, M, 1.0)), 0.0)
                W[:, :, h] = M
        D = np.zeros((n, n), dtype=np.int8)
        for (a, b), v in self.links.items():
            if a in pos and b in pos:
                D[pos[a], pos[b]] = D[pos[b], pos[a]] = v
        X = self._first_stage(recipe, first_stage_columns, pair_means, W)
        net = NetworkData(adjacency=D, covariates=X, pairwise=W, node_ids=tuple(ids))
        return net, [r.label for r in recipe]

    def _log_column(self, col):
        if col not in self.node_columns:
            raise DataError(f"node column {col!r} not found")
        x = np.asarray(self.node_columns[col], dtype=float)
        if np.any(x <= 0):
            raise DataError(f"log of non-positive value in node column {col!r}")
        return np.log(x)

    def _pair_matrix(self, col, pos):
        if col not in self.pair_columns:
            raise DataError(f"pair column {col!r} not found")
        n = len(pos)
        M = np.full((n, n), np.nan)
        np.fill_diagonal(M, 0.0)
        for (a, b), v in self.pair_columns[col].items():
            if a in pos and b in pos:
                M[pos[a], pos[b]] = M[pos[b], pos[a]] = v
        if np.isnan(M).any():
            raise DataError(f"pair column {col!r} does not cover every node pair")
        return M

    def _first_stage(self, recipe, columns, pair_means, W):
        cols = []
        if columns is not None:
            for c in columns:
                if c not in self.node_columns:
                    raise DataError(f"first-stage column {c!r} not found")
                cols.append(np.asarray(self.node_columns[c], dtype=float))
        else:
            for item in recipe:
                if item.node_level:
                    cols.append(self._log_column(item.column))
        if pair_means:
            n = W.shape[0]
            for h, item in enumerate(recipe):
                if not item.node_level:
                    cols.append(W[:, :, h].sum(axis=1) / (n - 1))
        if not cols:
            raise DataError("no first-stage covariates: give node-level columns or enable pair means")
        return np.column_stack(cols)


def load_dataset(
    nodes_path,
    dyads_path=None,
    edges_path=None,
    *,
    id_col="id",
    i_col="i",
    j_col="j",
    link_col="link",
    link_rule="binary",
    required_node_columns=(),
    required_pair_columns=(),
) -> DyadDataset:
    """Read a node table plus a dyad table and/or an edge list.

    Links come from the edge list when one is given, otherwise from
    ``link_col`` of the dyad table. Under the ``binary`` rule both orientations
    of a dyad must agree; the ``any_mention`` rule links a dyad when either
    side mentions the other. Nodes with missing required values are dropped,
    then nodes are dropped greedily until every remaining pair has all its
    required pairwise values.
    """
    if link_rule not in LINK_RULES:
        raise InputError(f"unknown link rule {link_rule!r}; choose from {sorted(LINK_RULES)}")
    to_link = LINK_RULES[link_rule]
    header, rows = _read_rows(nodes_path)
    if id_col not in header:
        raise DataError(f"node table has no {id_col!r} column")
    node_cols = [c for c in header if c != id_col]
    for c in required_node_columns:
        if c not in node_cols:
            raise DataError(f"node column {c!r} not found")
    ids, values, seen = [], {c: [] for c in node_cols}, set()
    for r in rows:
        a = r[id_col].strip()
        if a in seen:
            raise DataError(f"duplicate node id {a!r}")
        seen.add(a)
        ids.append(a)
        for c in node_cols:
            values[c].append(_num(r[c]))
    dropped = []
    keep = []
    for k, a in enumerate(ids):
        if any(math.isnan(values[c][k]) for c in required_node_columns):
            dropped.append(a)
        else:
            keep.append(k)

    order = {a: k for k, a in enumerate(ids)}

    def key(a, b):
        return (a, b) if order[a] < order[b] else (b, a)

    pair_columns, links, directed = {}, {}, {}
    if dyads_path is not None:
        dh, drows = _read_rows(dyads_path)
        for c in (i_col, j_col):
            if c not in dh:
                raise DataError(f"dyad table has no {c!r} column")
        pcols = [c for c in dh if c not in (i_col, j_col, link_col)]
        for c in required_pair_columns:
            if c not in pcols:
                raise DataError(f"pair column {c!r} not found")
        pair_columns = {c: {} for c in pcols}
        for r in drows:
            a, b = r[i_col].strip(), r[j_col].strip()
            if a not in order or b not in order:
                raise DataError(f"dyad ({a}, {b}) references an unknown node")
            if a == b:
                raise DataError(f"self-dyad for node {a!r}")
            kk = key(a, b)
            for c in pcols:
                v = _num(r[c])
                if math.isnan(v):
                    continue
                old = pair_columns[c].get(kk)
                if old is not None and old != v:
                    raise DataError(f"pair column {c!r} differs between orientations of ({a}, {b})")
                pair_columns[c][kk] = v
            if edges_path is None and link_col in dh:
                directed[(a, b)] = to_link(r[link_col])
    if edges_path is not None:
        eh, erows = _read_rows(edges_path)
        for r in erows:
            a, b = r[i_col].strip(), r[j_col].strip()
            if a not in order or b not in order:
                raise DataError(f"edge ({a}, {b}) references an unknown node")
            if a == b:
                raise DataError(f"self-loop at node {a!r}")
            directed[(a, b)] = to_link(r[link_col]) if link_col in eh else 1
        if link_rule == "binary":
            # an edge list lists linked pairs; absence means no link
            for (a, b), v in list(directed.items()):
                directed.setdefault((b, a), v)
    elif dyads_path is None:
        raise InputError("need a dyad table or an edge list")
    for (a, b), v in directed.items():
        kk = key(a, b)
        if link_rule == "binary" and (b, a) in directed and directed[(b, a)] != v:
            raise DataError(f"asymmetric link entries for dyad ({a}, {b})")
        links[kk] = max(links.get(kk, 0), v)

    # greedy removal of nodes involved in missing pairwise values
    alive = [ids[k] for k in keep]
    while required_pair_columns:
        missing = {}
        for x in range(len(alive)):
            for y in range(x + 1, len(alive)):
                kk = key(alive[x], alive[y])
                if any(kk not in pair_columns[c] for c in required_pair_columns):
                    missing[alive[x]] = missing.get(alive[x], 0) + 1
                    missing[alive[y]] = missing.get(alive[y], 0) + 1
        if not missing:
            break
        worst = max(alive, key=lambda a: (missing.get(a, 0), -order[a]))
        alive.remove(worst)
        dropped.append(worst)
    kept_idx = [order[a] for a in alive]
    node_values = {c: [values[c][k] for k in kept_idx] for c in node_cols}
    return DyadDataset(node_ids=alive, node_columns=node_values, pair_columns=pair_columns,
                       links=links, dropped=dropped)
