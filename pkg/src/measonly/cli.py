"""Command-line entry point: ``measonly <subcommand> [options]``.

Each run writes its outputs plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 2 configuration error, 3 contract violation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import dense, dynamics, graph, index, io, scaling
from .config import ConfigError, apply_override, ensemble_from_config, load_config, run_config_from
from .ensembles import EnumerationTooLarge, SiteProbs
from .pauli import LengthMismatch

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT, EXIT_NUMERICAL = 0, 2, 3, 4


class NumericalFailure(RuntimeError):
    pass


def _version() -> str:
    try:
        return version("measonly")
    except PackageNotFoundError:
        return "unknown"


def _path_from(d: dict | None) -> scaling.ProbPath:
    d = d or {}
    return scaling.ProbPath(d.get("kind", "symmetric"), float(d.get("anchor_x", 0.5)))


def _probs_on(path: scaling.ProbPath, q0: float) -> SiteProbs:
    if path.kind == "symmetric":
        return SiteProbs.symmetric_line(q0)
    if path.kind == "margin":
        return SiteProbs.margin(q0)
    return path.probs(q0 * float(np.linalg.norm(path._anchor() - 1.0 / 3.0)))


# ---------------------------------------------------------------- commands


def cmd_index(cfg, args, out):
    spec = ensemble_from_config(cfg)
    sec = cfg.get("index", {})
    if "L_idx" in sec:
        spec = spec.with_length(int(sec["L_idx"]))
    method = sec.get("method", "closed_form")
    if method == "exact":
        res = index.index_exact(spec, int(sec.get("cap", 10**6)))
    elif method == "closed_form":
        res = index.index_closed_form(spec)
    elif method == "monte_carlo":
        rng = np.random.default_rng(args.seed)
        res = index.index_monte_carlo(spec, int(sec.get("samples", 10**6)), rng)
    else:
        raise ConfigError(f"unknown index method {method!r}")
    payload = res.to_dict() | {"L_idx": spec.length}
    print(json.dumps(payload, indent=2))
    return [io.write_json(out / "index.json", payload)]


def cmd_index_curve(cfg, args, out):
    sec = cfg.get("index_curve", {})
    family = sec.get("family", "factorizable")
    r_values = [int(r) for r in sec.get("r", [3, 4, 5, 6, 7, 8])]
    length = int(sec.get("L_idx", index.DEFAULT_L_IDX))
    path = _path_from(sec.get("path"))
    grid = [float(q) for q in sec.get("q0", np.round(np.linspace(0.0, 0.5, 51), 6).tolist())]
    meta = {"index_curve": sec, "L_idx": length}
    curve = []
    for r in r_values:
        for q0 in grid:
            probs = _probs_on(path, q0)
            curve.append((r, q0, probs.p_x, probs.p_y, probs.p_z,
                          index.index_at(family, probs, r, length)))
    files = [io.write_csv(out / "index_curve.csv", ["r", "q0", "p_x", "p_y", "p_z", "index"],
                          curve, meta)]

    bfam = sec.get("boundary", "eq6" if family == "factorizable" else "eq12")
    report = {"family": family, "L_idx": length, "fits": []}
    paths = [path] + [scaling.ProbPath("anchor", float(a)) for a in sec.get("anchors", [])]
    crit_rows = []
    for p in paths:
        boundary = scaling.PhaseBoundary(bfam, p)
        fit = index.critical_index_curve(family, r_values, boundary, length)
        report["fits"].append({"boundary": boundary.to_dict()} | fit.to_dict())
        for r in r_values:
            pt = boundary.point(r)
            if pt.exists:
                crit_rows.append((json.dumps(p.to_dict(), sort_keys=True), r, pt.q0, pt.delta_qc,
                                  index.index_at(family, pt.probs, r, length)))
    files.append(io.write_csv(out / "critical_index.csv",
                              ["path", "r", "q0_c", "delta_qc", "index_c"], crit_rows, meta))
    files.append(io.write_json(out / "critical_fit.json", report))
    print(json.dumps({k: report["fits"][0][k] for k in ("slope", "intercept", "r_squared")}))
    return files


def cmd_graph(cfg, args, out):
    spec = ensemble_from_config(cfg)
    g = graph.build_graph(spec, int(cfg.get("graph", {}).get("cap", graph.DEFAULT_NODE_CAP)))
    report = graph.classify(g)
    (out / "graph_edges.txt").write_text(g.edge_list(), encoding="utf-8")
    files = [out / "graph_edges.txt",
             io.write_csv(out / "graph_nodes.csv", ["node", "pauli", "prob"],
                          [(i, str(n.op), n.prob) for i, n in enumerate(g.nodes)],
                          {"ensemble": spec.to_dict()}),
             io.write_json(out / "graph_report.json",
                           report.to_dict() | {"ensemble": spec.to_dict()})]
    print(json.dumps(report.to_dict(), indent=2))
    return files


def _write_result(res: dynamics.EnsembleResult, out: Path, meta: dict) -> list[Path]:
    files = [io.write_csv(out / "steady.csv", ["observable", "mean", "std_error"],
                          [(k, res.steady_mean[k], res.steady_stderr[k])
                           for k in sorted(res.steady_mean)], meta)]
    if res.series is not None:
        files.append(io.write_csv(out / "half_chain_series.csv", ["layer", "mean", "std_error"],
                                  zip(res.series.times.tolist(), res.series.mean.tolist(),
                                      res.series.std_error.tolist()), meta))
    if res.profile is not None:
        files.append(io.write_csv(out / "profile.csv", ["size", "mean", "std_error"],
                                  zip(res.profile.times.tolist(), res.profile.mean.tolist(),
                                      res.profile.std_error.tolist()), meta))
    return files


def cmd_simulate(cfg, args, out):
    config = run_config_from(cfg, args.seed)
    res = dynamics.run_ensemble_average(config, args.workers)
    print(json.dumps(res.to_dict()["steady"], indent=2))
    return _write_result(res, out, config.to_dict())


def cmd_sweep(cfg, args, out):
    template = run_config_from(cfg, args.seed)
    sec = cfg.get("sweep", {})
    if "q0" not in sec or "sizes" not in sec:
        raise ConfigError("sweep needs 'q0' and 'sizes'")
    rows = dynamics.sweep(template, [float(q) for q in sec["q0"]],
                          [int(L) for L in sec["sizes"]], args.workers)
    meta = template.to_dict() | {"sweep": sec}
    return [io.write_dict_rows(out / "sweep.csv", rows, meta)]


def cmd_collapse(cfg, args, out):
    sec = cfg.get("collapse", {})
    if "input" not in sec:
        raise ConfigError("collapse needs an 'input' sweep CSV")
    column = sec.get("observable", "mutual_info_mean")
    _, rows = io.read_csv(Path(sec["input"]))
    if not rows or column not in rows[0]:
        raise ConfigError(f"column {column!r} not found in {sec['input']}")
    q = [r["q0"] for r in rows]
    sizes = [r["L"] for r in rows]
    y = [r[column] for r in rows]
    norm = bool(sec.get("normalize_peak", False))
    try:
        fit = scaling.collapse(q, sizes, y, normalize_peak=norm, init=sec.get("init"))
    except scaling.CollapseError as exc:
        raise NumericalFailure(str(exc)) from exc
    report = fit.to_dict() | {"input": str(sec["input"]), "observable": column,
                              "crossings": scaling.crossing_points(q, sizes, y)}
    print(json.dumps({k: report[k] for k in ("q_c", "nu", "shift_A", "objective")}))
    return [io.write_json(out / "collapse.json", report),
            io.write_csv(out / "collapsed.csv", ["L", "q0", "x", "y"],
                         scaling.collapsed_coordinates(fit, q, sizes, y), {"collapse": sec})]


def cmd_fit(cfg, args, out):
    sec = cfg.get("fit", {})
    if "input" not in sec:
        raise ConfigError("fit needs an 'input' CSV")
    _, rows = io.read_csv(Path(sec["input"]))
    xk, yk = sec.get("x", "x"), sec.get("y", "y")
    if not rows or xk not in rows[0] or yk not in rows[0]:
        raise ConfigError(f"columns {xk!r}/{yk!r} not found")
    fit = scaling.fit_linear([(r[xk], r[yk]) for r in rows])
    print(json.dumps({k: v for k, v in fit.to_dict().items() if k != "points"}))
    return [io.write_json(out / "fit.json", fit.to_dict() | {"input": str(sec["input"])})]


def cmd_boundary(cfg, args, out):
    sec = cfg.get("boundary", {})
    family = sec.get("family", "eq6")
    rs = sec.get("r", 3)
    rs = rs if isinstance(rs, list) else [rs]
    path = _path_from(sec.get("path"))
    points = []
    for r in rs:
        if family == "eq6":
            points.append(scaling.qc_from_eq6(int(r), path).to_dict())
        elif family == "eq12":
            points.append(scaling.qc_from_eq12(int(r), sec.get("parity"), path).to_dict())
        else:
            raise ConfigError(f"unknown boundary family {family!r}")
    payload = {"family": family, "path": path.to_dict(), "points": points}
    print(json.dumps(payload, indent=2))
    return [io.write_json(out / "boundary.json", payload)]


def cmd_oracle_check(cfg, args, out):
    sec = cfg.get("oracle", {})
    report = dense.run_oracle_check(int(sec.get("sequences", 200)),
                                    int(sec.get("measurements", 50)),
                                    tuple(int(s) for s in sec.get("sizes", (4, 6, 8))),
                                    seed=args.seed)
    print(json.dumps(report, indent=2))
    path = io.write_json(out / "oracle.json", report)
    if not report["passed"]:
        raise NumericalFailure("stabilizer and dense entropies disagree")
    return [path]


COMMANDS = {
    "index": cmd_index,
    "index-curve": cmd_index_curve,
    "graph": cmd_graph,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "collapse": cmd_collapse,
    "fit": cmd_fit,
    "boundary": cmd_boundary,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="measonly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", "-c", type=Path, help="YAML config file")
        p.add_argument("--out", "-o", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, help="master seed (overrides config 'seed')")
        p.add_argument("--workers", type=int, help="worker processes (default $%s or 1)"
                       % dynamics.WORKERS_ENV)
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config field, e.g. run.trajectories=10")
        if name == "boundary":
            p.add_argument("--family", choices=["eq6", "eq12"])
            p.add_argument("--r", type=int, nargs="+")
            p.add_argument("--parity", choices=["odd", "even"])
        if name in ("collapse", "fit"):
            p.add_argument("--input", type=Path)
        if name == "collapse":
            p.add_argument("--normalize-peak", action="store_true", default=None)
            p.add_argument("--observable")
    return parser


def _merge_flags(cfg: dict, args) -> dict:
    flag_keys = {
        "boundary": {"family": "family", "r": "r", "parity": "parity"},
        "collapse": {"input": "input", "normalize_peak": "normalize_peak",
                     "observable": "observable"},
        "fit": {"input": "input"},
    }
    section = args.command if args.command in flag_keys else None
    for attr, key in flag_keys.get(section, {}).items():
        val = getattr(args, attr, None)
        if val is not None:
            cfg.setdefault(section, {})[key] = str(val) if isinstance(val, Path) else val
    if args.seed is None:
        args.seed = int(cfg.get("seed", 0))
    cfg["seed"] = args.seed
    if args.workers is None:
        args.workers = int(cfg.get("workers", dynamics.default_workers()))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = load_config(args.config)
        for ov in args.overrides:
            cfg = apply_override(cfg, ov)
        cfg = _merge_flags(cfg, args)
        args.out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, args, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, KeyError, LengthMismatch, EnumerationTooLarge) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    manifest = {
        "command": args.command,
        "config": cfg,
        "seed": args.seed,
        "workers": args.workers,
        "version": _version(),
        "wall_time_s": time.perf_counter() - start,
        "outputs": [Path(f).name for f in files],
    }
    io.write_json(args.out / "manifest.json", manifest)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
