"""Command-line front end: generate, solve, validate, bench.

Exit codes are frozen: 0 success, 1 usage error, 2 input error, 3 internal
inconsistency.  A JSON config file can supply any long-option value; explicit
flags win over the config file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .aco import AcoError, AntParameters, run_colony
from .instance import (
    Instance,
    InstanceError,
    SchemaError,
    deserialize_instance,
    generate_multiperiod,
    serialize_instance,
)
from .mip import InternalInconsistencyError, gap_percent, solve_mip
from .model import (
    DimensionMismatchError,
    ModelBuildError,
    ModelCache,
    check_feasible,
    evaluate_routing,
    expand_solution,
    routing_from_point,
    solution_from_document,
    solution_to_document,
)
from .paths import PathGenerationError
from .rins import RinsConfig, RinsError, run_rins
from .sndlib import SndlibParseError, SndlibValidationError, parse_sndlib

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

CSV_HEADER = "id,nodes,edges,commodities,periods,method,cost,bound,gap_pct,wall_s,seed"

LOG_HEADER = [
    "iteration",
    "ant",
    "cost",
    "zbar",
    "best",
    "elapsed_s",
    "event",
    "fixed_vars",
    "submip_nodes",
    "improvement",
]

METHODS = ("aco", "aco-rins", "exact", "lp-bound")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


@dataclass
class RunReport:
    """One solve outcome in the shape of a benchmark table row."""

    instance_id: str
    nodes: int
    edges: int
    commodities: int
    periods: int
    method: str
    cost: float | None
    bound: float | None
    gap_pct: float | None
    wall_s: float
    seed: int
    log_path: str | None = None

    def csv_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)  # shortest round-trip form keeps gaps recomputable
            return str(v)

        return [
            self.instance_id,
            str(self.nodes),
            str(self.edges),
            str(self.commodities),
            str(self.periods),
            self.method,
            fmt(self.cost),
            fmt(self.bound),
            fmt(self.gap_pct),
            f"{self.wall_s:.3f}",
            str(self.seed),
        ]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; our contract says 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="robustnd", description=__doc__)
    p.add_argument("--config", help="JSON file with default option values")
    sub = p.add_subparsers(dest="command")

    g = sub.add_parser("generate", help="build an instance from an SNDlib file")
    g.add_argument("--sndlib", required=True, help="SNDlib native-format file")
    g.add_argument("--periods", type=int, default=None)
    g.add_argument("--growth", type=float, default=None)
    g.add_argument("--deviation", type=float, default=None, help="relative deviation span")
    g.add_argument("--bands", type=int, default=None)
    g.add_argument("--theta-fraction", type=float, default=None)
    g.add_argument("--paths", type=int, default=None)
    g.add_argument("--cost-decay", type=float, default=None)
    g.add_argument("--module-capacity", type=float, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default=None, help="output instance file (default stdout)")

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method", choices=METHODS, default=None)
    s.add_argument("--time-limit", type=float, default=None, help="seconds for the main solve")
    s.add_argument("--rins-limit", type=float, default=None, help="seconds for the RINS sub-solve")
    s.add_argument("--rins-every", type=int, default=None,
                   help="extension: also run RINS every N iterations (default: only at the end)")
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--ants", type=int, default=None)
    s.add_argument("--window", type=int, default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--attractiveness", choices=("exact-lp", "surrogate"), default=None)
    s.add_argument("--out", default=None, help="solution file")
    s.add_argument("--log", default=None, help="iteration log CSV")

    v = sub.add_parser("validate", help="check a solution file against its instance")
    v.add_argument("instance")
    v.add_argument("solution")

    b = sub.add_parser("bench", help="run methods over a directory of instances")
    b.add_argument("directory")
    b.add_argument("--methods", default=None, help="comma-separated subset of: " + ",".join(METHODS))
    b.add_argument("--time-limit", type=float, default=None)
    b.add_argument("--rins-limit", type=float, default=None)
    b.add_argument("--alpha", type=float, default=None)
    b.add_argument("--ants", type=int, default=None)
    b.add_argument("--window", type=int, default=None)
    b.add_argument("--epsilon", type=float, default=None)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--attractiveness", choices=("exact-lp", "surrogate"), default=None)
    b.add_argument("--jobs", type=int, default=None)
    b.add_argument("--out", default=None, help="CSV output file (default stdout)")
    b.add_argument("--plot-data", default=None, help="directory for per-run iteration logs")
    return p


_DEFAULTS = {
    "periods": 1,
    "growth": 1.0,
    "deviation": 0.1,
    "bands": 1,
    "theta_fraction": 0.25,
    "paths": 5,
    "cost_decay": 1.0,
    "module_capacity": None,
    "seed": 0,
    "method": None,
    "time_limit": 30.0,
    "rins_limit": 5.0,
    "rins_every": None,
    "alpha": 0.5,
    "ants": 3,
    "window": None,  # defaults to ants
    "epsilon": 0.1,
    "attractiveness": "exact-lp",
    "methods": "exact,aco-rins",
    "jobs": 1,
}


def _resolve(args: argparse.Namespace, config: dict) -> argparse.Namespace:
    """Fill unset options from the config file, then from built-in defaults."""
    for key, default in _DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            cfg_key = key.replace("_", "-")
            if cfg_key in config:
                setattr(args, key, config[cfg_key])
            elif key in config:
                setattr(args, key, config[key])
            else:
                setattr(args, key, default)
    return args


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InputError(f"config {path} must contain a JSON object")
    return cfg


def _read_instance(path: str) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return deserialize_instance(text)
    except (SchemaError, InstanceError) as exc:
        raise InputError(f"{path}: {exc}") from exc


# -- generate ----------------------------------------------------------------


def cmd_generate(args) -> int:
    try:
        text = Path(args.sndlib).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.sndlib}: {exc}") from exc
    try:
        base = parse_sndlib(text)
    except SndlibParseError as exc:
        raise InputError(f"{args.sndlib}: {exc}") from exc
    except SndlibValidationError as exc:
        raise InputError(f"{args.sndlib}: {exc}") from exc
    for w in base.warnings:
        print(f"warning: {w}", file=sys.stderr)
    try:
        instance = generate_multiperiod(
            base,
            periods=args.periods,
            growth=args.growth,
            deviation_fraction=args.deviation,
            bands=args.bands,
            theta_fraction=args.theta_fraction,
            seed=args.seed,
            num_paths=args.paths,
            cost_decay=args.cost_decay,
            module_capacity=args.module_capacity,
        )
    except (InstanceError, PathGenerationError) as exc:
        raise InputError(str(exc)) from exc
    doc = serialize_instance(instance)
    if args.out:
        Path(args.out).write_text(doc)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(doc)
    return EXIT_OK


# -- solve -------------------------------------------------------------------


def _log_writer(rows: list[dict]):
    def write(row: dict) -> None:
        rows.append(row)

    return write


def _flush_log(path: str | None, rows: list[dict]) -> None:
    if not path:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=LOG_HEADER)
        w.writeheader()
        for row in rows:
            out = {k: row.get(k, "") for k in LOG_HEADER}
            out.setdefault("event", "")
            if not out["event"]:
                out["event"] = row.get("event", "ant")
            w.writerow(out)


def solve_instance(instance: Instance, args, instance_id: str) -> tuple[RunReport, dict | None, list[dict]]:
    """Run one method on one instance; returns (report, solution doc, log rows)."""
    method = args.method
    cache = ModelCache(instance)
    log_rows: list[dict] = []
    t0 = time.perf_counter()
    cost = bound = gap = None
    doc = None

    if method == "lp-bound":
        rel = cache.relaxation(robust=True)
        if rel.status != "optimal":
            raise InputError(f"relaxation is {rel.status}")
        bound = float(rel.objective)
        print(f"lp-bound: {bound:.6f}")
    elif method == "exact":
        result = solve_mip(
            cache.mip(robust=True),
            time_limit=args.time_limit if args.time_limit else None,
        )
        bound = result.bound
        if result.x is not None:
            vx = cache.vindex(robust=True)
            routing, problems = routing_from_point(vx, result.x)
            if problems:
                raise InternalInconsistencyError("exact solve returned a broken routing")
            sol = evaluate_routing(instance, routing, vindex=cache.vindex(robust=False))
            cost = sol.cost
            gap = gap_percent(cost, bound)
            sol.lower_bound = bound
            sol.gap = gap
            doc = solution_to_document(instance, sol)
        print(f"exact: status={result.status} cost={cost} bound={bound} nodes={result.node_count}")
    elif method in ("aco", "aco-rins"):
        window = args.window if args.window else args.ants
        params = AntParameters(
            alpha=args.alpha, num_ants=args.ants, window=window, rng_seed=args.seed
        )
        daemon = None
        daemon_every = None
        if method == "aco-rins" and args.rins_every:
            cfg = RinsConfig(epsilon=args.epsilon, time_limit=args.rins_limit)

            def daemon(best):
                out = run_rins(instance, best, cfg, cache=cache)
                log_rows.append(
                    {
                        "iteration": "",
                        "ant": "",
                        "cost": out.solution.cost,
                        "zbar": "",
                        "best": out.solution.cost,
                        "elapsed_s": time.perf_counter() - t0,
                        "event": "rins",
                        "fixed_vars": out.fixed_count,
                        "submip_nodes": out.submip_nodes,
                        "improvement": out.improvement,
                    }
                )
                return out.solution

            daemon_every = args.rins_every
        colony = run_colony(
            instance,
            params,
            time_limit=args.time_limit,
            mode=args.attractiveness,
            cache=cache,
            log_writer=_log_writer(log_rows),
            daemon=daemon,
            daemon_every=daemon_every,
        )
        best = colony.best
        bound = best.lower_bound
        if method == "aco-rins":
            cfg = RinsConfig(epsilon=args.epsilon, time_limit=args.rins_limit)
            out = run_rins(instance, best, cfg, cache=cache)
            log_rows.append(
                {
                    "iteration": "",
                    "ant": "",
                    "cost": out.solution.cost,
                    "zbar": "",
                    "best": out.solution.cost,
                    "elapsed_s": time.perf_counter() - t0,
                    "event": "rins",
                    "fixed_vars": out.fixed_count,
                    "submip_nodes": out.submip_nodes,
                    "improvement": out.improvement,
                }
            )
            best = out.solution
        cost = best.cost
        gap = gap_percent(cost, bound)
        best.gap = gap
        doc = solution_to_document(instance, best)
        print(
            f"{method}: cost={cost:.6f} bound={bound:.6f} gap={gap:.2f}%"
            f" iterations={colony.iterations}"
        )
    else:
        raise UsageError(f"unknown method {method!r}")

    wall = time.perf_counter() - t0
    report = RunReport(
        instance_id=instance_id,
        nodes=len(instance.network.vertices),
        edges=len(instance.network.edges),
        commodities=len(instance.commodities),
        periods=instance.num_periods,
        method=method,
        cost=cost,
        bound=bound,
        gap_pct=gap,
        wall_s=wall,
        seed=getattr(args, "seed", 0),
    )
    return report, doc, log_rows


def cmd_solve(args) -> int:
    if args.method is None:
        raise UsageError("--method is required (or set it in the config file)")
    if args.time_limit is not None and args.time_limit <= 0:
        raise UsageError("time limit must be positive")
    instance = _read_instance(args.instance)
    instance_id = Path(args.instance).stem
    try:
        report, doc, log_rows = solve_instance(instance, args, instance_id)
    except (AcoError, RinsError, ModelBuildError) as exc:
        raise InputError(str(exc)) from exc
    if args.out and doc is not None:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote {args.out}")
    _flush_log(args.log, log_rows)
    print(CSV_HEADER)
    print(",".join(report.csv_row()))
    return EXIT_OK


# -- validate ----------------------------------------------------------------


def cmd_validate(args) -> int:
    instance = _read_instance(args.instance)
    try:
        doc = json.loads(Path(args.solution).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {args.solution}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.solution}: not valid JSON: {exc}") from exc
    try:
        solution = solution_from_document(instance, doc)
        vx_cache = ModelCache(instance)
        point = expand_solution(instance, solution, vx_cache.vindex(robust=True))
        report = check_feasible(instance, point)
    except DimensionMismatchError as exc:
        raise InputError(f"dimension mismatch: {exc}") from exc
    if report.ok:
        print("solution is feasible")
        return EXIT_OK
    print(f"{len(report.violations)} violation(s):")
    for v in report.violations:
        print(f"  {v}")
    return EXIT_INPUT


# -- bench -------------------------------------------------------------------


def _bench_one(task: dict) -> dict:
    ns = argparse.Namespace(**task["args"])
    instance = _read_instance(task["path"])
    report, _, log_rows = solve_instance(instance, ns, task["instance_id"])
    if task.get("plot_dir"):
        out = Path(task["plot_dir"]) / f"{task['instance_id']}-{ns.method}.csv"
        _flush_log(str(out), log_rows)
        report.log_path = str(out)
    return asdict(report)


def cmd_bench(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise InputError(f"{args.directory} is not a directory")
    files = sorted(directory.glob("*.json")) + sorted(directory.glob("*.inst"))
    if not files:
        raise InputError(f"no instance files (*.json, *.inst) in {args.directory}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r} in --methods")
    if args.plot_data:
        Path(args.plot_data).mkdir(parents=True, exist_ok=True)

    tasks = []
    for path in files:
        for method in methods:
            run_args = {
                "method": method,
                "time_limit": args.time_limit,
                "rins_limit": args.rins_limit,
                "rins_every": None,
                "alpha": args.alpha,
                "ants": args.ants,
                "window": args.window,
                "epsilon": args.epsilon,
                "seed": args.seed,
                "attractiveness": args.attractiveness,
            }
            tasks.append(
                {
                    "path": str(path),
                    "instance_id": path.stem,
                    "args": run_args,
                    "plot_dir": args.plot_data,
                }
            )
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]

    lines = [CSV_HEADER]
    for res in results:
        rep = RunReport(**res)
        lines.append(",".join(rep.csv_row()))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: generate | solve | validate | bench")
        config = _load_config(args.config)
        args = _resolve(args, config)
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "bench":
            return cmd_bench(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalInconsistencyError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
