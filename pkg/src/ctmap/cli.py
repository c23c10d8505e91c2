"""Command-line front end.

Subcommands: gen-env, coverage, route, dataset, eval, render. Machine
readable results go to stdout, logs to stderr. Exit codes: 0 success,
2 usage/validation error, 3 runtime error (unreachable pair, remote
failure).
"""

from __future__ import annotations

import argparse
import sys

from . import dataset as ds
from . import envmodel, evaluation, llm_bridge, propagation, render, routing
from .errors import (CTMapError, RemoteError, SchemaError, Unreachable,
                     ValidationError)
from .gridgraph import DEFAULT_EPSILON_MW, build_graph

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _log(msg):
    print(msg, file=sys.stderr)


def _parse_cell(text):
    try:
        col, row = text.split(",")
        return int(col), int(row)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected COL,ROW integers, got {text!r}") from None


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def cmd_gen_env(args):
    env, stations = envmodel.generate_random_environment(
        seed=args.seed, width_m=args.width, height_m=args.height,
        resolution_m=args.resolution, n_blocks=args.blocks,
        block_size_range=(args.block_min, args.block_max),
        n_stations=args.stations)
    envmodel.save_environment_file(env, stations, args.out)
    _log(f"wrote scene with {len(env.buildings)} buildings, "
         f"{len(stations)} stations to {args.out}")
    return EXIT_OK


def cmd_coverage(args):
    env, stations = envmodel.load_environment_file(args.scene)
    params = propagation.PropagationParams(
        nlos_penalty_db=args.nlos_penalty,
        path_loss_exponent=args.exponent,
        shadowing_sigma_db=args.shadowing_sigma,
        shadowing_seed=args.shadowing_seed)
    cov = propagation.compute_coverage(env, stations, params)
    propagation.save_coverage(cov, args.out)
    _log(f"wrote {cov.cols}x{cov.rows} coverage map to {args.out}")
    return EXIT_OK


def cmd_route(args):
    cov = propagation.load_coverage(args.map)
    graph = build_graph(cov, args.epsilon)
    planners = {
        "oracle": routing.plan_signal_aware,
        "shortest": routing.plan_shortest,
        "greedy": lambda g, c, s, d: routing.plan_greedy_alg1(g, c, s, d),
    }
    plan = planners[args.planner]
    route = plan(graph, cov, args.src, args.dst)
    print(llm_bridge.emit_route_text(route))
    if args.svg:
        render.render_svg_file(cov, args.svg,
                               routes=[(route.cells, "red", args.planner)],
                               cell_px=args.cell_px)
        _log(f"wrote route rendering to {args.svg}")
    return EXIT_OK


def cmd_dataset(args):
    cov = propagation.load_coverage(args.map)
    graph = build_graph(cov, args.epsilon)
    pairs = ds.sample_pairs(cov, args.n, args.seed,
                            min_separation_m=args.min_separation)
    records = ds.generate_records(cov, graph, pairs)
    split = ds.split_dataset(records, ratio=args.split, seed=args.seed)
    ds.write_jsonl(records, args.out, cov.resolution_m)
    train_path = args.out.replace(".jsonl", "") + ".train.jsonl"
    test_path = args.out.replace(".jsonl", "") + ".test.jsonl"
    ds.write_jsonl(split.train, train_path, cov.resolution_m)
    ds.write_jsonl(split.test, test_path, cov.resolution_m)
    _log(f"wrote {len(records)} records ({len(split.train)} train / "
         f"{len(split.test)} test)")
    print(f"{args.out}\n{train_path}\n{test_path}")
    return EXIT_OK


def _make_planner(args, cov, graph):
    spec = args.planner
    if spec == "oracle":
        return lambda s, d: llm_bridge.emit_route_text(
            routing.plan_signal_aware(graph, cov, s, d))
    if spec == "shortest":
        return lambda s, d: llm_bridge.emit_route_text(
            routing.plan_shortest(graph, cov, s, d))
    if spec == "greedy":
        return lambda s, d: llm_bridge.emit_route_text(
            routing.plan_greedy_alg1(graph, cov, s, d))
    if spec.startswith("mock:"):
        parts = spec.split(":")
        mode = parts[1]
        if mode == "none":
            perturbation = "none"
        elif mode == "detour":
            perturbation = ("detour", int(parts[2]) if len(parts) > 2 else 4)
        elif mode == "corrupt":
            perturbation = ("corrupt", float(parts[2]) if len(parts) > 2 else 0.3)
        else:
            raise ValidationError(f"unknown mock mode {mode!r}")
        return llm_bridge.MockPlanner(graph, cov, perturbation, seed=args.seed)
    if spec == "remote":
        if not args.endpoint:
            raise ValidationError("--endpoint required for the remote planner")
        config = llm_bridge.RemoteConfig(
            endpoint_url=args.endpoint, model_name=args.model,
            timeout_ms=args.timeout_ms, max_retries=args.max_retries,
            auth_token_env_var=args.token_env)
        return llm_bridge.RemotePlanner(config)
    raise ValidationError(f"unknown planner {spec!r}")


def cmd_eval(args):
    cov = propagation.load_coverage(args.map)
    graph = build_graph(cov, args.epsilon)
    header, records = ds.read_jsonl(args.test)
    pairs = [(r.source, r.dest) for r in records]
    planner = _make_planner(args, cov, graph)
    report = evaluation.evaluate_planner(planner, pairs, cov, graph,
                                         lenient=args.lenient)
    print(report.to_csv(args.planner), end="")
    if report.n_skipped:
        _log(f"skipped {report.n_skipped} pairs with unreachable oracle")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv(args.planner))
    return EXIT_OK


def cmd_render(args):
    cov = propagation.load_coverage(args.map)
    routes = []
    for spec in args.route or []:
        try:
            path, color, label = spec.split(":", 2)
        except ValueError:
            raise ValidationError(
                f"--route expects FILE:COLOR:LABEL, got {spec!r}") from None
        with open(path, "r", encoding="utf-8") as fh:
            cells, _ = llm_bridge.parse_route_text(fh.read())
        routes.append((cells, color, label))
    ramp = tuple(float(v) for v in args.ramp.split(",")) if args.ramp else None
    if ramp and len(ramp) != 2:
        raise ValidationError("--ramp expects MIN_DBM,MAX_DBM")
    render.render_svg_file(cov, args.out, routes=routes,
                           cell_px=args.cell_px, ramp=ramp)
    _log(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ctmap",
        description="Connectivity-aware navigation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-env", help="generate a random scene file")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--width", type=float, default=700.0)
    p.add_argument("--height", type=float, default=600.0)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--blocks", type=_nonneg_int, default=25)
    p.add_argument("--block-min", type=float, default=20.0)
    p.add_argument("--block-max", type=float, default=60.0)
    p.add_argument("--stations", type=_nonneg_int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_env)

    p = sub.add_parser("coverage", help="compute a coverage map from a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--nlos-penalty", type=float, default=25.0)
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--shadowing-sigma", type=float, default=0.0)
    p.add_argument("--shadowing-seed", type=int, default=0)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("route", help="plan one route")
    p.add_argument("--map", required=True)
    p.add_argument("--from", dest="src", type=_parse_cell, required=True)
    p.add_argument("--to", dest="dst", type=_parse_cell, required=True)
    p.add_argument("--planner", choices=("oracle", "shortest", "greedy"),
                   default="oracle")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON_MW)
    p.add_argument("--svg")
    p.add_argument("--cell-px", type=_positive_int, default=1)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("dataset", help="generate the instruction dataset")
    p.add_argument("--map", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--min-separation", type=float, default=50.0)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON_MW)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("eval", help="evaluate a planner on a test set")
    p.add_argument("--planner", required=True,
                   help="oracle | shortest | greedy | mock:MODE[:PARAM] | remote")
    p.add_argument("--test", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON_MW)
    p.add_argument("--csv")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--model", default="ctmap-planner")
    p.add_argument("--timeout-ms", type=_positive_int, default=30000)
    p.add_argument("--max-retries", type=_nonneg_int, default=2)
    p.add_argument("--token-env", default=llm_bridge.DEFAULT_TOKEN_ENV_VAR)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render a coverage map (and routes) to SVG")
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--route", action="append",
                   help="FILE:COLOR:LABEL; file holds route-grammar text")
    p.add_argument("--ramp", help="MIN_DBM,MAX_DBM for the color scale")
    p.add_argument("--cell-px", type=_positive_int, default=1)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError, CTMapError) as exc:
        if isinstance(exc, (Unreachable, RemoteError)):
            _log(f"error: {exc}")
            return EXIT_RUNTIME
        _log(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _log(f"io error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
