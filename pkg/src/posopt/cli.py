"""Command-line interface.

Exit codes: 0 on success, 2 when a checked claim is false (a profile is not
an equilibrium, a bound fails, a reproduction scenario fails), 1 when the
command could not run.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import instances, io
from .errors import PosoptError
from .game import PureProfile
from .mixed import (
    MixedStrategy,
    check_mixed_bounds,
    coverage_probability,
    exact_symmetric_utility,
    fig6_curve,
    mc_symmetric_utility,
    solve_two_point,
    verify_symmetric,
)
from .projection import project
from .pure import (
    best_response_dynamics,
    check_pure_theorems,
    enumerate_pure_equilibria,
    generate_pure,
    profile_from_counts,
    verify_pure,
)

DEFAULT_SEED = 0
DEFAULT_SAMPLES = 100_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _number(text: str) -> Fraction | float:
    """Fractions stay exact ("1/7"); decimals become floats."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


def _csv_numbers(text: str, flag: str) -> list:
    try:
        return [_number(v) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _csv_ints(text: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _param_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _profile(args, game, ps):
    if args.counts is not None:
        if ps is None:
            raise UsageError("--counts needs a game whose targets project onto pseudo-targets")
        return profile_from_counts(ps, _csv_ints(args.counts, "--counts"))
    if args.profile is not None:
        try:
            positions = json.loads(args.profile)
        except json.JSONDecodeError:
            raise UsageError(f"--profile: expected a JSON list of positions, got {args.profile!r}") from None
        if not isinstance(positions, list):
            raise UsageError("--profile: expected a JSON list of positions")
        return PureProfile(tuple(game.normalize(p) for p in positions))
    raise UsageError("one of --counts or --profile is required")


def _sigma(args, ps) -> MixedStrategy:
    if args.sigma is None:
        raise UsageError("--sigma is required")
    ws = [float(w) for w in _csv_numbers(args.sigma, "--sigma")]
    if len(ws) != ps.size:
        raise UsageError(f"--sigma: expected {ps.size} weights aligned to the pseudo-targets, got {len(ws)}")
    return MixedStrategy.on(ps, ws)


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


# -- handlers -------------------------------------------------------------


def cmd_project(args) -> int:
    game = io.load_game(args.game_file)
    io.write_json(project(game).to_dict(), args.output)
    return 0


def cmd_instance_build(args) -> int:
    params = {}
    if args.params:
        try:
            params.update(json.loads(args.params))
        except json.JSONDecodeError:
            raise UsageError("--params: expected a JSON object") from None
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param: expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _param_value(v)
    spec = instances.spec_from_params(args.kind, params)
    game = instances.build(spec)
    io.write_json(io.game_to_dict(game), args.output)
    return 0


def cmd_pure_gen(args) -> int:
    _require(args, "game", "n")
    game = io.load_game(args.game)
    ps = project(game)
    counts = generate_pure(ps, args.n)
    io.write_json({"n": args.n, "x_star": ps.pseudo_targets, "p": ps.p, "counts": counts}, args.output)
    return 0


def cmd_pure_verify(args) -> int:
    _require(args, "game")
    game = io.load_game(args.game)
    ps = project(game)
    prof = _profile(args, game, ps)
    cands = None
    if args.grid is not None:
        cands = instances.deviation_grid(game, args.grid)
    rep = verify_pure(game, prof, cands, ps=ps)
    io.write_json(rep.to_dict(), args.output)
    return 0 if rep.is_equilibrium else 2


def cmd_pure_enumerate(args) -> int:
    _require(args, "game", "n")
    game = io.load_game(args.game)
    ps = project(game)
    eqs = enumerate_pure_equilibria(ps, game, args.n, budget=args.budget)
    io.write_json(
        {
            "n": args.n,
            "x_star": ps.pseudo_targets,
            "p": ps.p,
            "equilibria": eqs,
            "count": len(eqs),
            "message": f"{len(eqs)} equilibria",
        },
        args.output,
    )
    return 0


def cmd_pure_dynamics(args) -> int:
    _require(args, "game")
    game = io.load_game(args.game)
    try:
        ps = project(game)
    except PosoptError:
        ps = None
    prof = _profile(args, game, ps)
    res = best_response_dynamics(game, prof, args.max_steps, rule=args.rule)
    rows = [
        (s.index, s.player, s.source, s.target, s.utility, s.new_utility, list(s.profile))
        for s in res.steps
    ]
    header = ["step", "player", "from", "to", "utility", "new_utility", "profile"]
    io.write_csv(header, rows, args.output)
    print(
        json.dumps({"status": res.status, "steps": len(res.steps), "cycle_start": res.cycle_start,
                    "count_revisit": res.count_revisit}),
        file=sys.stderr,
    )
    return 0


def cmd_pure_bounds(args) -> int:
    _require(args, "game", "c")
    game = io.load_game(args.game)
    ps = project(game)
    if args.counts is None:
        raise UsageError("--counts is required")
    counts = _csv_ints(args.counts, "--counts")
    n = sum(counts) if args.n is None else args.n
    c = _number(args.c)
    rep = check_pure_theorems(ps, counts, n, c, game)
    io.write_json(rep.to_dict(), args.output)
    return 0 if rep.passed else 2


def cmd_mixed_solve2(args) -> int:
    _require(args, "p", "n")
    n = _single_n(args.n)
    sigma = solve_two_point(float(args.p), n, args.tol)
    io.write_json({"p": float(args.p), "n": n, "sigma": sigma}, args.output)
    return 0


def _single_n(text: str) -> int:
    vals = _csv_ints(text, "--n")
    if len(vals) != 1:
        raise UsageError("--n: expected a single integer")
    return vals[0]


def cmd_mixed_verify(args) -> int:
    _require(args, "game", "n")
    game = io.load_game(args.game)
    ps = project(game)
    n = _single_n(args.n)
    sigma = _sigma(args, ps)
    bounds = check_mixed_bounds(ps, sigma, n, samples=args.samples, seed=args.seed)
    cands = None if args.grid is None else instances.deviation_grid(game, args.grid)
    sym = verify_symmetric(game, sigma, n, cands, tol=args.tol if args.tol is not None else 1e-9)
    io.write_json({"equilibrium": sym.to_dict(), "bounds": bounds.to_dict()}, args.output)
    return 0 if sym.is_equilibrium else 2


def cmd_mixed_utility(args) -> int:
    _require(args, "game", "n")
    game = io.load_game(args.game)
    ps = project(game)
    n = _single_n(args.n)
    sigma = _sigma(args, ps)
    xs = ps.pseudo_targets if args.position is None else [ps.pseudo_targets[args.position]]
    out = []
    for x in xs:
        row = {"position": x, "exact": exact_symmetric_utility(game, x, sigma, n)}
        if args.samples_given:
            est, se = mc_symmetric_utility(game, x, sigma, n, args.samples, args.seed)
            row.update({"mc_estimate": est, "mc_stderr": se})
        out.append(row)
    io.write_json({"n": n, "sigma": sigma.weights, "utilities": out}, args.output)
    return 0


def cmd_mixed_coverage(args) -> int:
    _require(args, "sigma", "n")
    ws = _csv_numbers(args.sigma, "--sigma")
    n = _single_n(args.n)
    value, se = coverage_probability(ws, n, args.mode, samples=args.samples, seed=args.seed)
    out = {"n": n, "sigma": [str(w) if isinstance(w, Fraction) else w for w in ws], "coverage": float(value)}
    if isinstance(value, Fraction):
        out["coverage_exact"] = str(value)
    out["stderr"] = se
    io.write_json(out, args.output)
    return 0


def cmd_mixed_curve(args) -> int:
    _require(args, "n")
    ns = _csv_ints(args.n, "--n")
    rows = fig6_curve(ns, args.grid, args.tol)
    io.write_csv(["n", "p", "sigma"], rows, args.output)
    return 0


def cmd_repro(args) -> int:
    from .repro import ALIASES, SCENARIOS, run_claim

    if args.claim == "list":
        names = {v: k for k, v in ALIASES.items()}
        for key in SCENARIOS:
            print(f"{key}\t{names.get(key, '')}")
        return 0
    keys = list(SCENARIOS) if args.claim == "all" else [args.claim]
    results = []
    for key in keys:
        try:
            results.append(run_claim(key))
        except KeyError:
            raise UsageError(f"unknown claim id {key!r}; try 'posopt repro list'") from None
    for r in results:
        print(r.line(), file=sys.stderr)
    payload = results[0].to_dict() if len(results) == 1 else [r.to_dict() for r in results]
    io.write_json(payload, args.output)
    return 0 if all(r.passed for r in results) else 2


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posopt", description="Position-optimization games: equilibria and bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(p):
        p.add_argument("-o", "--output", help="output file (default: stdout)")

    p = sub.add_parser("project", help="pseudo-targets and projected distribution of a game")
    p.add_argument("game_file")
    out(p)
    p.set_defaults(func=cmd_project)

    inst = sub.add_parser("instance", help="instance builders").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = inst.add_parser("build", help="write a named instance as a game file")
    p.add_argument("--kind", required=True, choices=sorted(instances.SPECS))
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="instance parameter (JSON value), repeatable")
    p.add_argument("--params", help="instance parameters as a JSON object")
    out(p)
    p.set_defaults(func=cmd_instance_build)

    pure = sub.add_parser("pure", help="pure equilibria").add_subparsers(dest="action", required=True, parser_class=_Parser)

    def pure_common(p, n=True):
        p.add_argument("--game", help="game file")
        if n:
            p.add_argument("--n", type=int, help="number of players")
        out(p)

    p = pure.add_parser("gen", help="construct an equilibrium count vector")
    pure_common(p)
    p.set_defaults(func=cmd_pure_gen)

    def profile_flags(p):
        p.add_argument("--counts", help="comma-separated counts aligned to the pseudo-targets")
        p.add_argument("--profile", help="JSON list of player positions")

    p = pure.add_parser("verify", help="check a profile for profitable deviations")
    pure_common(p, n=False)
    profile_flags(p)
    p.add_argument("--grid", type=int, help="lattice points per axis for deviation candidates")
    p.set_defaults(func=cmd_pure_verify)

    p = pure.add_parser("enumerate", help="all equilibrium count vectors over the pseudo-targets")
    pure_common(p)
    p.add_argument("--budget", type=int, default=10**6)
    p.set_defaults(func=cmd_pure_enumerate)

    p = pure.add_parser("dynamics", help="best-response dynamics trace as CSV")
    pure_common(p, n=False)
    profile_flags(p)
    p.add_argument("--max-steps", type=int, default=100)
    p.add_argument("--rule", choices=("best", "first"), default="best")
    p.set_defaults(func=cmd_pure_dynamics)

    p = pure.add_parser("bounds", help="structural and KL-rate checks for an equilibrium")
    pure_common(p)
    p.add_argument("--counts", help="comma-separated counts aligned to the pseudo-targets")
    p.add_argument("--c", help="rate constant, e.g. 1/7 or 0.1")
    p.set_defaults(func=cmd_pure_bounds)

    mixed = sub.add_parser("mixed", help="symmetric mixed equilibria").add_subparsers(dest="action", required=True, parser_class=_Parser)

    def mixed_common(p, game=True):
        if game:
            p.add_argument("--game", help="game file")
        p.add_argument("--n", help="number of players (comma-separated list for curve)")
        p.add_argument("--sigma", help="comma-separated weights aligned to the pseudo-targets")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--tol", type=float, default=None)
        out(p)

    p = mixed.add_parser("solve2", help="two-point equilibrium weight on the mass-p position")
    mixed_common(p, game=False)
    p.add_argument("--p", type=float)
    p.set_defaults(func=cmd_mixed_solve2)

    p = mixed.add_parser("verify", help="check a symmetric strategy and its 1/n bounds")
    mixed_common(p)
    p.add_argument("--grid", type=int, help="lattice points per axis for deviation candidates")
    p.set_defaults(func=cmd_mixed_verify)

    p = mixed.add_parser("utility", help="symmetric utility of each pseudo-target")
    mixed_common(p)
    p.add_argument("--position", type=int, help="index into the pseudo-targets (default: all)")
    p.set_defaults(func=cmd_mixed_utility)

    p = mixed.add_parser("coverage", help="probability that n draws cover every position")
    mixed_common(p, game=False)
    p.add_argument("--mode", choices=("auto", "exact", "mc"), default="auto")
    p.set_defaults(func=cmd_mixed_coverage)

    p = mixed.add_parser("curve", help="two-point equilibrium curves as CSV")
    mixed_common(p, game=False)
    p.add_argument("--grid", type=int, default=201, help="points on the uniform p grid")
    p.set_defaults(func=cmd_mixed_curve)

    p = sub.add_parser("repro", help="run a reproduction scenario ('list' shows ids, 'all' runs every one)")
    p.add_argument("claim")
    out(p)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "samples"):
        args.samples_given = args.samples is not None
        if args.samples is None:
            args.samples = DEFAULT_SAMPLES
    if getattr(args, "tol", "absent") is None and args.func is not cmd_mixed_verify:
        args.tol = 1e-12
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"posopt: error: {exc}", file=sys.stderr)
        return 1
    except (PosoptError, ValueError, OSError) as exc:
        print(f"posopt: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
