"""Command-line front end.

Exit codes: 0 all checks pass, 1 invariant failure in a report, 2 usage or
configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import scaling
from .bfc import assemble_bfc, eval_errors, eval_id_errors, to_id_code
from .channel import capacity, load_channel
from .inner import build_identity_code, build_random_code, load_code, save_code
from .logic import compile_formula, dnf_weight_bound, evaluate, parse, tautologically_equivalent, unparse
from .boolfn import save_function
from .pipeline import ConfigError, StageError, load_fixture_config, run_pipeline
from .setfamily import build_family_greedy, gilbert_build, load_family, save_family, verify_family


def _positive_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("this command requires --seed")
    return args.seed


def _emit(payload, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_capacity(args) -> int:
    ch = load_channel(args.channel)
    c = capacity(ch, args.tol)
    if args.format == "json":
        _emit({"channel": args.channel, "capacity": c, "tol": args.tol}, args)
    else:
        print(f"{c:.9f}")
    return 0


def cmd_family(args) -> int:
    fam = build_family_greedy(
        args.ground_size, args.epsilon, args.lam, args.target, _positive_seed(args)
    )
    rep = verify_family(fam)
    if args.out:
        save_family(fam, args.out)
    summary = {
        "size": fam.size,
        "member_size": fam.member_size,
        "cap": fam.intersection_cap,
        "verified": rep.ok,
        "max_intersection": rep.max_intersection,
    }
    if args.format == "json":
        print(json.dumps(summary, sort_keys=True))
    else:
        print(
            f"family: {fam.size} members of size {fam.member_size}, cap "
            f"{fam.intersection_cap}, verified={rep.ok}, "
            f"max_intersection={rep.max_intersection}"
        )
    return 0 if rep.ok else 1


def cmd_gilbert(args) -> int:
    fam = gilbert_build(args.length, args.weight, args.alpha, seed=args.seed or 0)
    rep = verify_family(fam)
    if args.out:
        save_family(fam, args.out)
    summary = {
        "size": fam.size,
        "weight": fam.weight,
        "overlap_cap": fam.overlap_cap,
        "verified": rep.ok,
    }
    if args.format == "json":
        print(json.dumps(summary, sort_keys=True))
    else:
        print(
            f"constant-weight family: {fam.size} members, weight {fam.weight}, "
            f"overlap cap {fam.overlap_cap}, verified={rep.ok}"
        )
    return 0 if rep.ok else 1


def cmd_build(args) -> int:
    ch = load_channel(args.channel)
    if args.kind == "identity":
        code = build_identity_code(ch, args.n)
    else:
        code = build_random_code(ch, args.n, args.M, _positive_seed(args))
    if args.out:
        save_code(code, args.out)
    if args.format == "json":
        print(
            json.dumps(
                {"M": code.size, "n": code.n, "delta": code.delta,
                 "delta_mode": code.delta_mode},
                sort_keys=True,
            )
        )
    else:
        print(f"code: M={code.size}, n={code.n}, delta={code.delta} ({code.delta_mode})")
    return 0


def _load_bundle(bundle_dir):
    bundle = Path(bundle_dir)
    ch = load_channel(bundle / "channel.json")
    inner = load_code(bundle / "inner.json")
    family = load_family(bundle / "family.json")
    with open(bundle / "functions.json") as fh:
        from .boolfn import BooleanFunction

        functions = [BooleanFunction.from_json_dict(d) for d in json.load(fh)]
    return ch, assemble_bfc(inner, family, functions)


def cmd_eval(args) -> int:
    ch, code = _load_bundle(args.bundle)
    rep = eval_errors(
        code, ch, mode=args.mode, trials=args.trials, seed=args.seed or 0
    )
    _emit(rep.to_json_dict(), args)
    return 0


def cmd_convert_id(args) -> int:
    ch, code = _load_bundle(args.bundle)
    idcode = to_id_code(code, alpha=args.alpha)
    rep = eval_id_errors(
        idcode, ch, mode=args.mode, trials=args.trials, seed=args.seed or 0
    )
    payload = rep.to_json_dict()
    payload["alpha_computed"] = idcode.alpha
    _emit(payload, args)
    if rep.method == "exact" and not (
        rep.misid_within_guarantee and rep.wrongid_within_guarantee in (True, None)
    ):
        return 1
    return 0


def cmd_scaling(args) -> int:
    if args.case is None:
        cases = scaling.default_cases()
    else:
        kwargs = {"c": args.c}
        if args.case == 2:
            kwargs["beta"] = args.beta
        if args.case == 4:
            kwargs["b"] = args.b
        if args.case == 6:
            kwargs["gamma"] = args.gamma
        cases = [scaling.ScalingCase(args.case, **kwargs)]
    n_list = [int(x) for x in args.n_list.split(",")]
    rows = scaling.emit_table(args.capacity, n_list, cases)
    if args.feasibility:
        for row in rows:
            case = next(c for c in cases if c.case_id == row["case"])
            plan = scaling.plan_and_check(
                case, row["n"], args.capacity, args.delta, args.xi, args.xi_prime
            )
            row["eps_ok"] = plan.eps_ok
            row["eq_m_ok"] = plan.eq_m_ok
            row["lambda_ok"] = plan.lambda_ok
    if args.format == "json":
        _emit(rows, args)
        return 0
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_logic(args) -> int:
    if args.formula_file:
        text = Path(args.formula_file).read_text().strip()
    elif args.formula:
        text = args.formula
    else:
        raise ConfigError("pass --formula TEXT or --formula-file PATH")
    tree = parse(text, args.m)
    if args.logic_op == "compile":
        fn = compile_formula(tree, args.m)
        if args.out:
            save_function(fn, args.out)
        payload = fn.to_json_dict()
        payload["weight"] = fn.weight
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0
    if args.logic_op == "eval":
        assignment = [int(c) for c in args.assignment]
        if len(assignment) != args.m:
            raise ConfigError("assignment length must equal m")
        print(evaluate(tree, assignment))
        return 0
    if args.logic_op == "equiv":
        other = parse(args.other, args.m)
        print("equivalent" if tautologically_equivalent(tree, other, args.m) else "distinct")
        return 0
    if args.logic_op == "dnf-bound":
        print(dnf_weight_bound(tree, args.m))
        return 0
    if args.logic_op == "unparse":
        print(unparse(tree))
        return 0
    raise ConfigError(f"unknown logic operation {args.logic_op!r}")


def cmd_run(args) -> int:
    if args.fixture:
        config = load_fixture_config(args.fixture)
    elif args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    else:
        raise ConfigError("pass --config FILE or --fixture NAME")
    out_dir = args.out_dir or config.get("output", {}).get("dir")
    if not out_dir:
        raise ConfigError("no output directory: pass --out-dir or set output.dir")
    report = run_pipeline(config, out_dir)
    print(f"report written to {Path(out_dir) / 'report.json'}; pass={report['pass']}")
    return 0 if report["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bfclab",
        description="Construct and exactly verify Boolean-function-computation codes.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("capacity", help="Shannon capacity of a channel")
    c.add_argument("--channel", required=True, help="preset (bsc:0.11) or JSON path")
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--format", choices=["text", "json"], default="text")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_capacity)

    f = sub.add_parser("family", help="greedy bounded-intersection family")
    f.add_argument("--ground-size", type=int, required=True)
    f.add_argument("--epsilon", type=float, required=True)
    f.add_argument("--lam", type=float, required=True)
    f.add_argument("--target", type=int, required=True)
    f.add_argument("--seed", type=int)
    f.add_argument("--format", choices=["text", "json"], default="text")
    f.add_argument("--out")
    f.set_defaults(fn=cmd_family)

    g = sub.add_parser("gilbert", help="greedy constant-weight family")
    g.add_argument("--length", type=int, required=True)
    g.add_argument("--weight", type=int, required=True)
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=["text", "json"], default="text")
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gilbert)

    b = sub.add_parser("build", help="build an inner transmission code")
    b.add_argument("--channel", required=True)
    b.add_argument("--kind", choices=["identity", "random"], default="random")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--M", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--format", choices=["text", "json"], default="text")
    b.add_argument("--out")
    b.set_defaults(fn=cmd_build)

    e = sub.add_parser("eval", help="evaluate errors of an assembled bundle")
    e.add_argument("--bundle", required=True)
    e.add_argument("--mode", choices=["exact", "monte_carlo"], default="exact")
    e.add_argument("--trials", type=int, default=100_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(fn=cmd_eval)

    ci = sub.add_parser("convert-id", help="convert a bundle to an identification code")
    ci.add_argument("--bundle", required=True)
    ci.add_argument("--alpha", type=float, default=None)
    ci.add_argument("--mode", choices=["exact", "monte_carlo"], default="exact")
    ci.add_argument("--trials", type=int, default=100_000)
    ci.add_argument("--seed", type=int, default=0)
    ci.add_argument("--out")
    ci.set_defaults(fn=cmd_convert_id)

    s = sub.add_parser("scaling", help="summary table of achievable/converse ceilings")
    s.add_argument("--capacity", type=float, required=True)
    s.add_argument("--case", type=int, choices=range(1, 7))
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--b", type=float, default=2.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--n-list", default="10")
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--xi", type=float, default=0.05)
    s.add_argument("--xi-prime", type=float, default=0.1)
    s.add_argument("--feasibility", action="store_true")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_scaling)

    lg = sub.add_parser("logic", help="parse, evaluate and compile formulas")
    lg.add_argument("logic_op", choices=["compile", "eval", "equiv", "dnf-bound", "unparse"])
    lg.add_argument("--m", type=int, required=True)
    lg.add_argument("--formula")
    lg.add_argument("--formula-file", help="read the formula from a file instead")
    lg.add_argument("--assignment", help="bit string, e.g. 101 (for eval)")
    lg.add_argument("--other", help="second formula (for equiv)")
    lg.add_argument("--out")
    lg.set_defaults(fn=cmd_logic)

    r = sub.add_parser("run", help="run a full pipeline from a config file")
    r.add_argument("--config")
    r.add_argument("--fixture", help="bundled fixture name (identity-id, bsc-rank)")
    r.add_argument("--out-dir")
    r.set_defaults(fn=cmd_run)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, StageError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
