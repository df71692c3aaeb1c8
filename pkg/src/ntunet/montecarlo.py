"""Monte Carlo replications of the two-step estimator and their summary metrics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .core import InputError
from .criterion import SmoothingKind, TetradPlan, build_pair_table
from .dgp import DgpConfig, baseline_config, draw_population, form_network
from .search import SearchConfig, minimize
from .sieve import fit_all, rho_hat_matrix


@dataclass(frozen=True)
class McConfig:
    B: int = 100
    dgp: DgpConfig = field(default_factory=lambda: baseline_config(n=100, d=3, corr=0.2))
    M: int = 1000
    search: SearchConfig = field(default_factory=SearchConfig)
    kind: str = SmoothingKind.SCALED_NORMAL_CDF.value
    base_seed: int = 0
    num_threads: int = 1

    def __post_init__(self):
        if self.B < 1:
            raise InputError("B must be at least 1")
        if self.M < 1:
            raise InputError("M must be at least 1")
        object.__setattr__(self, "kind", SmoothingKind.parse(self.kind).value)


def replication_seed(base_seed: int, b: int) -> int:
    return int(base_seed) ^ int(b)


@dataclass(frozen=True)
class ReplicationResult:
    b: int
    seed: int
    beta_lower: np.ndarray
    beta_upper: np.ndarray
    beta_mid: np.ndarray
    min_value: float
    evaluations: int
    density: float


def estimate_network(net, w, M, search: SearchConfig, kind, plan_seed, num_threads=1):
    """Two-step estimate: sieve popularities, then grid search of the criterion."""
    R = rho_hat_matrix(fit_all(net), net.covariates)
    W = np.asarray(net.pairwise) if net.pairwise is not None else w.matrix(net.covariates)
    plan = TetradPlan.sample(net.n, M, seed=plan_seed)
    table = build_pair_table(R, W, plan, kind, symmetric=True if w is None else w.symmetric)

    def objective(betas):
        return table.evaluate(betas, num_threads=num_threads)

    return minimize(objective, W.shape[2], search, batched=True)


def run_replication(cfg: McConfig, b: int) -> ReplicationResult:
    seed = replication_seed(cfg.base_seed, b)
    dgp = replace(cfg.dgp, seed=seed)
    pop = draw_population(dgp)
    net = form_network(pop, dgp)
    res = estimate_network(net, dgp.w, cfg.M, cfg.search, cfg.kind, seed, cfg.num_threads)
    return ReplicationResult(
        b=int(b),
        seed=seed,
        beta_lower=res.beta_lower,
        beta_upper=res.beta_upper,
        beta_mid=res.beta_mid,
        min_value=res.min_value,
        evaluations=res.evaluations,
        density=net.density,
    )


@dataclass
class McReport:
    bias: np.ndarray
    upper_bias: np.ndarray
    lower_bias: np.ndarray
    mean_width: np.ndarray
    rmse: float
    mnd: float
    mmad: float
    B: int
    raw: list = field(default_factory=list, repr=False)

    def rows(self) -> list[list]:
        """Report in a metric-by-coordinate layout."""
        d = self.bias.size
        out = [["metric"] + [f"beta_{h + 1}" for h in range(d)]]
        for name, vec in (("bias", self.bias), ("upper_bias", self.upper_bias),
                          ("lower_bias", self.lower_bias), ("mean(u-l)", self.mean_width)):
            out.append([name] + [repr(float(v)) for v in vec])
        for name, val in (("rMSE", self.rmse), ("MND", self.mnd), ("MMAD", self.mmad)):
            out.append([name, repr(float(val))] + [""] * (d - 1))
        return out


def compute_metrics(raw, beta0) -> McReport:
    """Summary metrics over replications.

    ``raw`` is a list of :class:`ReplicationResult` or an array shaped
    ``(B, 3, d)`` holding ``(lower, upper, mid)`` per replication.
    """
    if isinstance(raw, np.ndarray):
        arr = raw
        results = []
    else:
        results = list(raw)
        arr = np.array([[r.beta_lower, r.beta_upper, r.beta_mid] for r in results])
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] != 3:
        raise InputError("raw results must have shape (B, 3, d) with B >= 1")
    beta0 = np.asarray(beta0, dtype=float)
    lo, hi, mid = arr[:, 0], arr[:, 1], arr[:, 2]
    err = mid - beta0
    bias = err.mean(axis=0)
    norms = np.linalg.norm(err, axis=1)
    return McReport(
        bias=bias,
        upper_bias=(hi - beta0).mean(axis=0),
        lower_bias=(lo - beta0).mean(axis=0),
        mean_width=(hi - lo).mean(axis=0),
        rmse=float(np.sqrt(np.mean(norms**2))),
        mnd=float(np.mean(norms)),
        mmad=float(np.max(np.abs(bias))),
        B=arr.shape[0],
        raw=results,
    )


def run_mc(cfg: McConfig, progress=None) -> McReport:
    results = []
    for b in range(cfg.B):
        results.append(run_replication(cfg, b))
        if progress is not None:
            progress(b, results[-1])
    return compute_metrics(results, cfg.dgp.direction)


RAW_FIELDS = ("b", "seed", "min_value", "evaluations", "density")


def write_raw(path, results, header_lines=()):
    """Persist replication results with round-trip exact floats."""
    d = results[0].beta_mid.size
    cols = list(RAW_FIELDS)
    for tag in ("lower", "upper", "mid"):
        cols += [f"{tag}_{h + 1}" for h in range(d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        wr = csv.writer(fh)
        wr.writerow(cols)
        for r in results:
            row = [r.b, r.seed, repr(float(r.min_value)), r.evaluations, repr(float(r.density))]
            for vec in (r.beta_lower, r.beta_upper, r.beta_mid):
                row += [repr(float(v)) for v in vec]
            wr.writerow(row)


def read_raw(path) -> list[ReplicationResult]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows:
        raise InputError(f"no replications in {path}")
    d = sum(1 for k in rows[0] if k.startswith("mid_"))

    def vec(row, tag):
        return np.array([float(row[f"{tag}_{h + 1}"]) for h in range(d)])

    return [
        ReplicationResult(
            b=int(r["b"]),
            seed=int(r["seed"]),
            beta_lower=vec(r, "lower"),
            beta_upper=vec(r, "upper"),
            beta_mid=vec(r, "mid"),
            min_value=float(r["min_value"]),
            evaluations=int(r["evaluations"]),
            density=float(r["density"]),
        )
        for r in rows
    ]
