"""Command-line front end.

Commands: classify, singularity, slide-map, simulate, blowup,
transform-check, sweep, scenario.  Every command is a pure function of its
flags (plus the recorded seed), so identical invocations write identical
artifacts.  Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .fields import TwoFoldParams, normal_form_system
from .integrate import (IntegratorOptions, NonconvergentEventError, STEP_FLOOR,
                        EJECT_MINUS, EJECT_PLUS, STAY_SLIDING,
                        integrate_blowup, integrate_filippov, integrate_smoothed)
from .scenarios import (ConfigError, Scenario, builtin, builtin_names,
                        load_config, scenario_to_config, save_run)
from .singularities import (AlphaZeroError, classify_two_fold,
                            folded_singularities)
from .sliding import curve_L, degeneracy_report, region_classify, sliding_lambda
from .svg import render_region_map, render_trajectory
from .transform import TransformDomainError, transform_check

_POLICIES = {"stay": STAY_SLIDING, "eject-plus": EJECT_PLUS,
             "eject-minus": EJECT_MINUS}


def _add_system_args(sp):
    src = sp.add_argument_group("system source")
    src.add_argument("--scenario", metavar="NAME", help="built-in scenario name")
    src.add_argument("--config", metavar="PATH", help="JSON system configuration")
    src.add_argument("--a1", type=int, choices=(-1, 1))
    src.add_argument("--a2", type=int, choices=(-1, 1))
    src.add_argument("--b1", type=float)
    src.add_argument("--b2", type=float)
    src.add_argument("--alpha", type=float)


def _add_run_args(sp):
    sp.add_argument("--epsilon", type=float, help="smoothing/timescale parameter")
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--x0", type=_triple, help="initial state, three comma-separated numbers")
    sp.add_argument("--sigmoid", choices=("tanh", "sqrt"))
    sp.add_argument("--policy", choices=tuple(_POLICIES))
    sp.add_argument("--rel-tol", type=float, dest="rel_tol")
    sp.add_argument("--abs-tol", type=float, dest="abs_tol")
    sp.add_argument("--min-step", type=float, dest="min_step")


def _triple(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _resolve_scenario(args, parser) -> Scenario:
    given_params = [v is not None for v in (args.a1, args.a2, args.b1, args.b2, args.alpha)]
    sources = sum((args.scenario is not None, args.config is not None, any(given_params)))
    if sources != 1:
        parser.error("give exactly one system source: --scenario, --config, "
                     "or the full --a1/--a2/--b1/--b2/--alpha set")
    if args.scenario is not None:
        try:
            sc = builtin(args.scenario)
        except ValueError as exc:
            parser.error(str(exc))
    elif args.config is not None:
        try:
            sc = load_config(args.config)
        except (ConfigError, OSError, json.JSONDecodeError) as exc:
            parser.error(f"bad config: {exc}")
    else:
        if not all(given_params):
            parser.error("normal-form parameters need all of --a1 --a2 --b1 --b2 --alpha")
        p = TwoFoldParams(args.a1, args.a2, args.b1, args.b2, args.alpha)
        sc = Scenario("normal-form", normal_form_system(p), 1e-3, 10.0,
                      (0.0, 1.0, 1.0), "tanh", "")
    eps = getattr(args, "epsilon", None)
    t_end = getattr(args, "t_end", None)
    x0 = getattr(args, "x0", None)
    sigmoid = getattr(args, "sigmoid", None)
    return Scenario(sc.name, sc.system,
                    eps if eps is not None else sc.epsilon,
                    t_end if t_end is not None else sc.t_end,
                    x0 if x0 is not None else sc.x0,
                    sigmoid if sigmoid is not None else sc.sigmoid,
                    sc.note)


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")


def _need_params(sc: Scenario, parser) -> TwoFoldParams:
    if sc.params is None:
        parser.error(f"{sc.name!r} is not a normal-form system; this command "
                     "needs --a1/--a2/--b1/--b2/--alpha (or a params config)")
    return sc.params


def _params_echo(p: TwoFoldParams) -> dict:
    return {"a1": p.a1, "a2": p.a2, "b1": p.b1, "b2": p.b2, "alpha": p.alpha}


def _numerical_failure(traj_or_msg) -> int:
    if isinstance(traj_or_msg, str):
        print(f"numerical failure: {traj_or_msg}", file=sys.stderr)
    else:
        print("numerical failure: integration hit the step floor", file=sys.stderr)
        for e in traj_or_msg.events[-8:]:
            print(f"  t={e.t!r} {e.kind} state={e.state}", file=sys.stderr)
    return 3


# ---------------------------------------------------------------- commands

def _cmd_classify(args, parser) -> int:
    sc = _resolve_scenario(args, parser)
    p = _need_params(sc, parser)
    flavor = classify_two_fold(p)
    deg = degeneracy_report(p)
    report = {
        "params": _params_echo(p),
        "flavor": flavor.tag,
        "determinacy_breaking": flavor.determinacy_breaking,
        "degenerate_layer": deg.is_degenerate,
        "d2f1_dlambda2": deg.d2f1_dlambda2,
    }
    try:
        sings = folded_singularities(p)
        report["singularities"] = [s.to_json_dict() for s in sings]
        report["count"] = len(sings)
    except AlphaZeroError:
        report["singularities"] = []
        report["count"] = 0
        report["note"] = "alpha is zero: the layer problem is degenerate and no "\
                         "folded singularities are defined"
    if args.seed is not None:
        report["seed"] = args.seed
    _emit(report, args)
    return 0


def _cmd_singularity(args, parser) -> int:
    sc = _resolve_scenario(args, parser)
    p = _need_params(sc, parser)
    try:
        sings = folded_singularities(p)
    except AlphaZeroError as exc:
        parser.error(str(exc))
    report = {"params": _params_echo(p),
              "count": len(sings),
              "singularities": [s.to_json_dict() for s in sings]}
    if args.seed is not None:
        report["seed"] = args.seed
    _emit(report, args)
    return 0


def _cmd_slide_map(args, parser) -> int:
    sc = _resolve_scenario(args, parser)
    lo, hi = args.range
    n = args.grid
    if n < 2 or hi <= lo:
        parser.error("need --grid >= 2 and a nonempty --range lo,hi")
    sys_ = sc.system
    cells = []
    rows = []
    for i in range(n):
        x2 = lo + (hi - lo) * i / (n - 1)
        for j in range(n):
            x3 = lo + (hi - lo) * j / (n - 1)
            region = region_classify(sys_, x2, x3)
            sols = sliding_lambda(sys_, x2, x3)
            lams = [s.lam for s in sols]
            rows.append((x2, x3, region, lams))
            cells.append((x2, x3, region))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("x2,x3,region,n_roots,lambda_1,lambda_2\n")
            for x2, x3, region, lams in rows:
                l1 = repr(lams[0]) if len(lams) > 0 else ""
                l2 = repr(lams[1]) if len(lams) > 1 else ""
                fh.write(f"{x2!r},{x3!r},{region},{len(lams)},{l1},{l2}\n")
    curve = curve_L(sc.params, 201) if sc.params is not None else None
    if args.curve_out:
        if curve is None:
            parser.error("--curve-out needs a normal-form system")
        curve.to_csv(args.curve_out)
    if args.plot:
        render_region_map(cells, curve, args.plot)
    counts: dict[str, int] = {}
    for _, _, region, _ in rows:
        counts[region] = counts.get(region, 0) + 1
    report = {"grid": n, "range": [lo, hi], "region_counts": counts}
    if args.seed is not None:
        report["seed"] = args.seed
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _traj_summary(traj) -> dict:
    return {
        "samples": len(traj),
        "t_end": traj.t_end,
        "final_state": list(traj.final_state),
        "events": {k: len(traj.events_of(k)) for k in
                   sorted({e.kind for e in traj.events})},
        "sup_norm": traj.sup_norm(),
        "x1_sign_changes": traj.sign_changes(0),
    }


def _run_options(args) -> IntegratorOptions:
    kw = {"repelling_policy": _POLICIES[getattr(args, "policy", None) or "stay"]}
    for name in ("rel_tol", "abs_tol", "min_step"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    return IntegratorOptions(**kw)


def _cmd_simulate(args, parser) -> int:
    sc = _resolve_scenario(args, parser)
    opts = _run_options(args)
    try:
        if args.mode == "filippov":
            traj = integrate_filippov(sc.system, sc.x0, (0.0, sc.t_end), opts)
        else:
            traj = integrate_smoothed(sc.system, sc.sigmoid, sc.epsilon,
                                      sc.x0, (0.0, sc.t_end), opts)
    except NonconvergentEventError as exc:
        return _numerical_failure(str(exc))
    if args.seed is not None:
        traj.meta["seed"] = args.seed
    if args.out:
        save_run(traj, args.out)
    if args.plot:
        render_trajectory(traj, args.plot, view=args.view)
    report = {"scenario": sc.name, "mode": args.mode, "epsilon": sc.epsilon,
              "sigmoid": sc.sigmoid, "x0": list(sc.x0), **_traj_summary(traj)}
    if args.seed is not None:
        report["seed"] = args.seed
    print(json.dumps(report, indent=2, sort_keys=True))
    if traj.meta.get("aborted") == STEP_FLOOR:
        return _numerical_failure(traj)
    return 0


def _cmd_blowup(args, parser) -> int:
    sc = _resolve_scenario(args, parser)
    p = _need_params(sc, parser)
    y0 = args.x0 if args.x0 is not None else (0.0, 1.0, 1.0)
    if not -1.0 <= y0[0] <= 1.0:
        parser.error("blow-up initial state is lam,x2,x3 with lam in [-1, 1]")
    eps = args.epsilon if args.epsilon is not None else sc.epsilon
    t_end = args.t_end if args.t_end is not None else sc.t_end
    traj = integrate_blowup(p, eps, y0, (0.0, t_end), _run_options(args))
    if args.seed is not None:
        traj.meta["seed"] = args.seed
    if args.out:
        save_run(traj, args.out)
    if args.plot:
        render_trajectory(traj, args.plot, view=args.view)
    report = {"params": _params_echo(p), "epsilon": eps, **_traj_summary(traj)}
    if args.seed is not None:
        report["seed"] = args.seed
    print(json.dumps(report, indent=2, sort_keys=True))
    if traj.meta.get("aborted") == STEP_FLOOR:
        return _numerical_failure(traj)
    return 0


def _cmd_transform_check(args, parser) -> int:
    sc = _resolve_scenario(args, parser)
    p = _need_params(sc, parser)
    try:
        report = transform_check(p)
    except (AlphaZeroError, TransformDomainError) as exc:
        return _numerical_failure(str(exc))
    if args.seed is not None:
        report["seed"] = args.seed
    _emit(report, args)
    return 0


def _cmd_sweep(args, parser) -> int:
    if args.a1 is None or args.a2 is None or args.alpha is None:
        parser.error("sweep needs --a1, --a2 and --alpha")
    lo, hi = args.b_range
    step = args.b_step
    if step <= 0 or hi < lo:
        parser.error("need --b-step > 0 and --b-range lo,hi with lo <= hi")
    n = int(round((hi - lo) / step)) + 1
    rows = []
    for i in range(n):
        b1 = lo + i * step
        for j in range(n):
            b2 = lo + j * step
            p = TwoFoldParams(args.a1, args.a2, b1, b2, args.alpha)
            flavor = classify_two_fold(p)
            try:
                sings = folded_singularities(p)
                types = "+".join(s.folded_type for s in sings)
                count = len(sings)
            except AlphaZeroError:
                types, count = "", 0
            rows.append((b1, b2, flavor.tag, flavor.determinacy_breaking, count, types))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("b1,b2,flavor,determinacy_breaking,count,types\n")
            for b1, b2, tag, db, count, types in rows:
                fh.write(f"{b1!r},{b2!r},{tag},{str(db).lower()},{count},{types}\n")
    summary: dict[str, int] = {}
    for _, _, tag, db, count, types in rows:
        key = f"{tag}:{count}"
        summary[key] = summary.get(key, 0) + 1
    report = {"a1": args.a1, "a2": args.a2, "alpha": args.alpha,
              "cells": len(rows), "flavor_count_histogram": summary}
    if args.seed is not None:
        report["seed"] = args.seed
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_scenario(args, parser) -> int:
    if args.action == "list":
        print(json.dumps(builtin_names(), indent=2))
        return 0
    if args.name is None:
        parser.error("scenario show needs a name")
    try:
        sc = builtin(args.name)
    except ValueError as exc:
        parser.error(str(exc))
    print(json.dumps(scenario_to_config(sc), indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------- wiring

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twofold",
        description="Analysis and simulation of two-fold singularities in "
                    "piecewise-smooth dynamical systems.")
    parser.add_argument("--version", action="version", version=f"twofold {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, run_args=False):
        _add_system_args(sp)
        if run_args:
            _add_run_args(sp)
        sp.add_argument("--out", metavar="PATH", help="artifact output path")
        sp.add_argument("--plot", metavar="PATH", help="SVG output path")
        sp.add_argument("--view", choices=("u3", "u2", "x1", "x2", "x3"),
                        default="u3", help="projection axis for plots")
        sp.add_argument("--seed", type=int, metavar="U64",
                        help="recorded in artifacts for reproducibility")

    sp = sub.add_parser("classify", help="two-fold flavour and folded singularities")
    common(sp)
    sp.set_defaults(fn=_cmd_classify)

    sp = sub.add_parser("singularity", help="folded-singularity analysis report")
    common(sp)
    sp.set_defaults(fn=_cmd_singularity)

    sp = sub.add_parser("slide-map", help="region map of the switching surface")
    common(sp)
    sp.add_argument("--range", type=_pair, default=(-2.0, 2.0),
                    metavar="LO,HI", help="x2 and x3 range (default -2,2)")
    sp.add_argument("--grid", type=int, default=41, help="points per axis")
    sp.add_argument("--curve-out", metavar="PATH", dest="curve_out",
                    help="CSV of the fold curve with tangents")
    sp.set_defaults(fn=_cmd_slide_map)

    sp = sub.add_parser("simulate", help="integrate a system")
    common(sp, run_args=True)
    sp.add_argument("--mode", choices=("smoothed", "filippov"), default="smoothed")
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("blowup", help="integrate the layer (blow-up) system")
    common(sp, run_args=True)
    sp.set_defaults(fn=_cmd_blowup)

    sp = sub.add_parser("transform-check", help="order check of the folded-"
                                                "singularity equivalence")
    common(sp)
    sp.set_defaults(fn=_cmd_transform_check)

    sp = sub.add_parser("sweep", help="grid over (b1, b2) at fixed a1, a2, alpha")
    _add_system_args(sp)
    sp.add_argument("--b-range", type=_pair, default=(-6.0, 6.0), metavar="LO,HI")
    sp.add_argument("--b-step", type=float, default=0.1)
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--seed", type=int, metavar="U64")
    sp.set_defaults(fn=_cmd_sweep)

    sp = sub.add_parser("scenario", help="list or show built-in scenarios")
    sp.add_argument("action", choices=("list", "show"))
    sp.add_argument("name", nargs="?")
    sp.set_defaults(fn=_cmd_scenario)

    return parser


def _pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return (float(parts[0]), float(parts[1]))


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args, parser)
    except SystemExit as exc:        # argparse usage failure or --version
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
