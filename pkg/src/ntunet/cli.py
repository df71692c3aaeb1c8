"""Command-line interface: ``ntunet {simulate,estimate,idset,report}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .core import InputError, NumericError, PairwiseTransform
from .dgp import ConfigError, DgpConfig, idset_config
from .idset import compute_idset
from .ingest import DataError, RecipeItem, load_dataset
from .montecarlo import McConfig, compute_metrics, estimate_network, read_raw, run_mc, write_raw
from .search import SearchConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("ntunet")


def _hash_line(h):
    return f"config_hash: {h}"


def _write_csv(path, rows, h):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {_hash_line(h)}\n")
        csv.writer(fh).writerows(rows)


def _search_cfg(sec) -> SearchConfig:
    try:
        return SearchConfig(**sec)
    except (InputError, TypeError) as exc:
        raise ConfigError(f"search: {exc}") from None


def _heterogeneity(value, corr):
    if value is None:
        return (float(corr), 1.0 - float(corr))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return tuple(float(v) for v in value)
    raise ConfigError("heterogeneity must be null or a [c1, c2] pair; other rules have no closed-form popularity")


def _dgp_cfg(sec, seed) -> DgpConfig:
    try:
        return DgpConfig(
            n=int(sec["n"]),
            d=int(sec["d"]),
            beta0=sec["beta0"],
            support=sec["support"],
            heterogeneity=_heterogeneity(sec["heterogeneity"], sec["corr"]),
            w=PairwiseTransform(sec["w"]),
            seed=seed,
        )
    except InputError as exc:
        raise ConfigError(f"dgp: {exc}") from None


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _cells(cfg):
    sweep = cfg["mc"]["sweep"]
    if not sweep:
        return [dict(cfg["dgp"])]
    keys = [k for k in cfgmod.SWEEP_KEYS if k in sweep]
    cells = []
    for combo in itertools.product(*(sweep[k] for k in keys)):
        cell = dict(cfg["dgp"])
        cell.update(dict(zip(keys, combo)))
        cells.append(cell)
    return cells


def _cell_tag(cell):
    return f"n{cell['n']}_d{cell['d']}_corr{cell['corr']}_{cell['w']}"


def cmd_simulate(cfg, out: Path) -> list[str]:
    h = cfgmod.config_hash(cfg)
    search = _search_cfg(cfg["search"])
    cells = _cells(cfg)
    outputs = []
    summary = [["n", "d", "corr", "w", "B", "rMSE", "MND", "MMAD"]]
    for cell in cells:
        dgp = _dgp_cfg(cell, cfg["seed"])
        mc = McConfig(B=int(cfg["mc"]["B"]), dgp=dgp, M=int(cfg["mc"]["M"]), search=search,
                      kind=cfg["mc"]["kind"], base_seed=cfg["seed"], num_threads=cfg["threads"])
        log.info("simulating %s with B=%d", _cell_tag(cell), mc.B)
        report = run_mc(mc, progress=lambda b, r: log.debug("replication %d done", b))
        raw_name = "raw.csv" if len(cells) == 1 else f"raw_{_cell_tag(cell)}.csv"
        write_raw(out / raw_name, report.raw, header_lines=[_hash_line(h)])
        outputs.append(raw_name)
        if len(cells) == 1:
            _write_csv(out / "report.csv", report.rows(), h)
            outputs.append("report.csv")
        summary.append([cell["n"], cell["d"], cell["corr"], cell["w"], report.B,
                        repr(report.rmse), repr(report.mnd), repr(report.mmad)])
    if len(cells) > 1:
        _write_csv(out / "report.csv", summary, h)
        outputs.append("report.csv")
    return outputs


def cmd_report(raw_path: Path, beta0, out: Path, h: str) -> list[str]:
    results = read_raw(raw_path)
    if beta0 is None:
        d = results[0].beta_mid.size
        beta0 = np.ones(d) / np.sqrt(d)
    report = compute_metrics(results, beta0)
    _write_csv(out / "report.csv", report.rows(), h)
    return ["report.csv"]


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def _resolve_path(p, base: Path | None):
    if p is None:
        return None
    p = Path(p)
    return p if p.is_absolute() or base is None else base / p


def cmd_estimate(cfg, out: Path, base: Path | None = None) -> tuple[list[str], dict]:
    """Relative data paths resolve against ``base`` (the config file's folder)."""
    h = cfgmod.config_hash(cfg)
    data = cfg["data"]
    if not data["nodes"] or not data["recipe"]:
        raise ConfigError("data.nodes and data.recipe are required for estimate")
    try:
        recipe = [RecipeItem.parse(r) for r in data["recipe"]]
    except InputError as exc:
        raise ConfigError(str(exc)) from None
    node_cols = sorted({r.column for r in recipe if r.node_level} | set(data["first_stage_columns"] or []))
    pair_cols = sorted({r.column for r in recipe if not r.node_level})
    ds = load_dataset(
        _resolve_path(data["nodes"], base), _resolve_path(data["dyads"], base),
        _resolve_path(data["edges"], base),
        id_col=data["id_col"], i_col=data["i_col"], j_col=data["j_col"],
        link_col=data["link_col"], link_rule=data["link_rule"],
        required_node_columns=node_cols, required_pair_columns=pair_cols,
    )
    if ds.dropped:
        log.warning("dropped %d node(s) with missing fields: %s", len(ds.dropped), ", ".join(ds.dropped))
    net, labels = ds.to_network(recipe, data["first_stage_columns"], bool(data["first_stage_pair_means"]))
    if net.density == 0.0 or net.density == 1.0:
        raise DataError(f"degenerate network (density {net.density}); the criterion carries no information")
    res = estimate_network(net, None, int(data["M"]), _search_cfg(cfg["search"]), data["kind"],
                           cfg["seed"], cfg["threads"])
    rows = [["regressor", "beta_mid", "beta_lower", "beta_upper"]]
    for k, lab in enumerate(labels):
        rows.append([lab, repr(float(res.beta_mid[k])), repr(float(res.beta_lower[k])),
                     repr(float(res.beta_upper[k]))])
    _write_csv(out / "estimate.csv", rows, h)
    extra = {"n_nodes": net.n, "dropped_nodes": ds.dropped, "n_dropped": len(ds.dropped),
             "density": net.density, "min_criterion": res.min_value, "evaluations": res.evaluations}
    return ["estimate.csv"], extra


# ---------------------------------------------------------------------------
# idset
# ---------------------------------------------------------------------------


def cmd_idset(cfg, out: Path) -> list[str]:
    h = cfgmod.config_hash(cfg)
    sec = cfg["idset"]
    het = cfg["dgp"]["heterogeneity"]
    outputs = []
    summary = [["condition", "n_members", "theta1_min", "theta1_max", "theta2_min", "theta2_max",
                "area_sr", "diameter_deg", "tol", "min_value", "beta0_member"]]
    for cond in sec["conditions"]:
        try:
            dcfg = idset_config(cond, n=int(sec["N"]), seed=cfg["seed"])
            if het is not None:
                dcfg = replace(dcfg, heterogeneity=_heterogeneity(het, 0.0))
            if cfg["dgp"]["beta0"] is not None:
                dcfg = replace(dcfg, beta0=cfg["dgp"]["beta0"])
        except InputError as exc:
            raise ConfigError(str(exc)) from None
        log.info("identified set for %s", cond)
        anchor = sec["anchor"]
        grid = compute_idset(dcfg, M=int(sec["M"]), resolution_deg=float(sec["resolution_deg"]),
                             kind=sec["kind"], anchor=anchor,
                             rel_tol=float(sec["rel_tol"]), num_threads=cfg["threads"])
        rows = [["theta1", "theta2", "value", "member"]]
        for r, t1 in enumerate(grid.theta1):
            for c, t2 in enumerate(grid.theta2):
                rows.append([repr(float(t1)), repr(float(t2)), repr(float(grid.values[r, c])),
                             int(grid.member[r, c])])
        name = f"idset_{cond}.csv"
        _write_csv(out / name, rows, h)
        outputs.append(name)
        rect = grid.bounding_rectangle()
        summary.append([cond, rect["n_members"], rect["theta1_min"], rect["theta1_max"],
                        rect["theta2_min"], rect["theta2_max"], rect["area_sr"],
                        rect["diameter_deg"], grid.tol, grid.min_value,
                        int(grid.contains(dcfg.direction))])
    _write_csv(out / "idset_summary.csv", summary, h)
    outputs.append("idset_summary.csv")
    return outputs


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ntunet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "Monte Carlo replications of the two-step estimator"),
        ("estimate", "estimate the index direction on a node/dyad dataset"),
        ("idset", "identified set from the population criterion"),
        ("report", "recompute summary metrics from a raw results file"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="YAML run configuration")
        sp.add_argument("--out", type=Path, default=Path("ntunet_out"), help="output directory")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--threads", type=int, help="worker threads for the kernels")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "report":
            sp.add_argument("--raw", type=Path, required=True, help="raw results CSV")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config) if args.config else cfgmod.resolve({})
        if args.seed is not None:
            cfg["seed"] = int(args.seed)
        if args.threads is not None:
            cfg["threads"] = max(1, int(args.threads))
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        extra = None
        if args.command == "simulate":
            outputs = cmd_simulate(cfg, out)
        elif args.command == "estimate":
            base = args.config.parent if args.config else None
            outputs, extra = cmd_estimate(cfg, out, base)
        elif args.command == "idset":
            outputs = cmd_idset(cfg, out)
        else:
            beta0 = cfg["dgp"]["beta0"]
            outputs = cmd_report(args.raw, beta0, out, cfgmod.config_hash(cfg))
        man = cfgmod.manifest(cfg, args.command, outputs, extra)
        cfgmod.write_manifest(out / "manifest.json", man)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InputError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
