"""Command-line entry point.

Exit codes: 0 solved or verified clean, 1 usage or I/O error, 2 infeasible,
3 verification found violations.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import battery_path, lp, placement, render as render_mod, scheduler, solutions
from .errors import InfeasibleError, InstanceError, ModelSizeError
from .generate import KINDS, GenParams, generate_instance
from .grid import load_instance, render_instance
from .verify import verify_path, verify_placement, verify_schedule, violations_to_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_VIOLATIONS = 3

log = logging.getLogger("dronegrid")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "infeasible"
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _write(path: str | None, data) -> None:
    if path is None or path == "-":
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
        fh.write(data)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _demands(text: str) -> tuple:
    try:
        out = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"demands must be comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("need at least one demand")
    return out


def _schedule_problem(g, args, n_drones=None, horizon=None) -> scheduler.ScheduleProblem:
    drones = args.drones if args.drones is not None else (n_drones or len(g.warehouses))
    h = args.horizon if args.horizon is not None else (horizon or 14)
    return scheduler.ScheduleProblem(g, drones, h, pickup_policy=args.policy)


# --- subcommands -----------------------------------------------------------------

def _cmd_gen(args) -> int:
    params = GenParams(n_stations=args.stations, n_warehouses=args.warehouses, demands=args.demands)
    g = generate_instance(args.seed, args.rows, args.cols, args.density, args.kind, params)
    _write(args.out, render_instance(g))
    return EXIT_OK


def _cmd_place(args) -> int:
    g = load_instance(args.inp)
    p = placement.make_problem(g, seed=args.seed, max_stations=args.max_stations)
    try:
        sol = placement.solve_placement(p)
    except InfeasibleError as exc:
        log.warning("infeasible: %s", exc)
        _write(args.out, solutions.dumps(solutions.INFEASIBLE))
        return EXIT_INFEASIBLE
    _write(args.out, solutions.dumps(solutions.placement_to_dict(sol)))
    log.info("%d stations", sol.station_count)
    return EXIT_OK


def _cmd_route(args) -> int:
    g = load_instance(args.inp)
    p = battery_path.make_problem(g)
    try:
        sol = battery_path.solve_shortest_path(p)
    except InfeasibleError as exc:
        log.warning("infeasible: %s", exc)
        _write(args.out, solutions.dumps(solutions.INFEASIBLE))
        return EXIT_INFEASIBLE
    _write(args.out, solutions.dumps(solutions.path_to_dict(sol)))
    log.info("length %.6f over %d cells", sol.length, len(sol.cells))
    return EXIT_OK


def _cmd_schedule(args) -> int:
    g = load_instance(args.inp)
    p = _schedule_problem(g, args)
    try:
        sol = scheduler.solve_schedule(p)
    except InfeasibleError as exc:
        log.warning("infeasible: %s", exc)
        _write(args.out, solutions.dumps(solutions.INFEASIBLE))
        return EXIT_INFEASIBLE
    _write(args.out, solutions.dumps(solutions.schedule_to_dict(sol)))
    log.info("objective %.6f", sol.objective)
    return EXIT_OK


def _cmd_export(args) -> int:
    g = load_instance(args.inp)
    if args.kind == "placement":
        model = lp.export_placement(placement.make_problem(g, seed=args.seed, max_stations=args.max_stations))
    elif args.kind == "path":
        model = lp.export_path(battery_path.make_problem(g))
    else:
        model = lp.export_schedule(_schedule_problem(g, args), budget=args.budget)
    _write(args.out, lp.write_lp(model))
    return EXIT_OK


def _cmd_verify(args) -> int:
    g = load_instance(args.inp)
    doc = solutions.loads(_read(args.sol))
    if solutions.is_infeasible(doc):
        log.warning("solution file records an infeasible instance; nothing to verify")
        return EXIT_INFEASIBLE
    if args.kind == "placement":
        sol = solutions.placement_from_dict(doc)
        found = verify_placement(g, None, sol, max_stations=args.max_stations)
    elif args.kind == "path":
        found = verify_path(g, None, solutions.path_from_dict(doc))
    else:
        traces = doc.get("traces") or []
        horizon = len(traces[0].get("positions", [])) - 1 if traces else None
        p = _schedule_problem(g, args, n_drones=len(traces) or None, horizon=horizon if horizon else None)
        found = verify_schedule(p, solutions.schedule_from_dict(doc, p))
    if args.out:
        _write(args.out, violations_to_json(found))
    for v in found:
        log.warning("%s at %s: %s", v.constraint_id, v.location, v.detail)
    return EXIT_VIOLATIONS if found else EXIT_OK


def _cmd_render(args) -> int:
    g = load_instance(args.inp)
    spec = render_mod.RenderSpec(cell_px=args.cell_px, legend=args.legend)
    sol = None
    if args.sol:
        doc = solutions.loads(_read(args.sol))
        if not solutions.is_infeasible(doc):
            if args.kind == "placement":
                sol = solutions.placement_from_dict(doc)
            elif args.kind == "path":
                sol = solutions.path_from_dict(doc)
            elif args.kind == "schedule":
                sol = solutions.schedule_from_dict(doc)
            else:
                raise _UsageError("render --sol needs --kind")
    if sol is not None and args.kind == "schedule" and args.out not in (None, "-"):
        out = Path(args.out)
        for t, frame in enumerate(render_mod.schedule_frames(g, sol, spec)):
            _write(str(out.with_name(f"{out.stem}_t{t:02d}{out.suffix}")), render_mod.to_ppm(frame))
    _write(args.out, render_mod.render(g, sol, spec))
    return EXIT_OK


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dronegrid", description="Drone logistics on obstacle grids.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, inp=True):
        if inp:
            sp.add_argument("--in", dest="inp", required=True, help="instance JSON")
        sp.add_argument("--out", default=None, help="output file (stdout when omitted)")

    def sched_flags(sp):
        sp.add_argument("--horizon", type=int, default=None, help="timesteps H (default 14)")
        sp.add_argument("--drones", type=int, default=None, help="drone count (default: one per warehouse)")
        sp.add_argument("--policy", choices=scheduler.POLICIES, default=scheduler.ANY_WAREHOUSE)

    sp = sub.add_parser("gen", help="generate a random instance")
    common(sp, inp=False)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rows", type=int, default=10)
    sp.add_argument("--cols", type=int, default=10)
    sp.add_argument("--density", type=float, default=0.15)
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp.add_argument("--stations", type=int, default=None, help="path kind: station count")
    sp.add_argument("--warehouses", type=int, default=2, help="schedule kind: warehouse count")
    sp.add_argument("--demands", type=_demands, default=(2, 1, 1), help="schedule kind: e.g. 2,1,1")
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("place", help="minimum charging-station placement")
    common(sp)
    sp.add_argument("--seed", type=int, default=0, help="depot draw when the instance has none")
    sp.add_argument("--max-stations", type=int, default=placement.DEFAULT_MAX_STATIONS)
    sp.set_defaults(func=_cmd_place)

    sp = sub.add_parser("route", help="battery-constrained shortest path")
    common(sp)
    sp.set_defaults(func=_cmd_route)

    sp = sub.add_parser("schedule", help="multi-drone delivery schedule")
    common(sp)
    sched_flags(sp)
    sp.set_defaults(func=_cmd_schedule)

    sp = sub.add_parser("export-lp", help="write the linear model in LP format")
    common(sp)
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-stations", type=int, default=placement.DEFAULT_MAX_STATIONS)
    sp.add_argument("--budget", type=int, default=lp.DEFAULT_VARIABLE_BUDGET)
    sched_flags(sp)
    sp.set_defaults(func=_cmd_export)

    sp = sub.add_parser("verify", help="check a solution file against its instance")
    common(sp)
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp.add_argument("--sol", required=True, help="solution JSON")
    sp.add_argument("--max-stations", type=int, default=placement.DEFAULT_MAX_STATIONS)
    sched_flags(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("render", help="draw an instance or solution as PPM")
    common(sp)
    sp.add_argument("--sol", default=None)
    sp.add_argument("--kind", choices=KINDS, default=None)
    sp.add_argument("--cell-px", type=int, default=8)
    sp.add_argument("--legend", action="store_true")
    sp.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except (OSError, InstanceError, ModelSizeError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
