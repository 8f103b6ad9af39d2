"""End-to-end experiment runner: config in, verified artifact bundle out.

A bundle directory holds channel.json, inner.json, family.json,
functions.json, manifest.json, report.json and report_pairs.csv.  Identical
configs and seeds produce byte-identical report.json (the generated_at field
is excluded from comparisons).
"""

from __future__ import annotations

import csv
import datetime
import importlib.resources
import json
from pathlib import Path

import numpy as np

from . import _kernels
from .bfc import assemble_bfc, check_error_bounds, eval_errors, proved_error_bounds
from .boolfn import (
    BooleanFunction,
    make_and,
    make_bit,
    make_id,
    make_rank,
    make_threshold_atmost,
    make_threshold_exact,
)
from .channel import DEFAULT_ENUM_CAP, capacity, load_channel, save_channel
from .inner import (
    build_identity_code,
    build_random_code,
    eval_inner_error,
    load_code,
    output_space_size,
    save_code,
)
from .logic import compile_formula, parse
from .setfamily import build_family_greedy, load_family, save_family, verify_family

SCHEMA = "bfc-lab/1"


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def _stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, RuntimeError, OSError) as exc:
        raise StageError(stage, str(exc)) from exc


def load_fixture_config(name: str) -> dict:
    """Configs bundled with the package ("identity-id", "bsc-rank")."""
    fname = name.replace("-", "_") + ".json"
    ref = importlib.resources.files("bfclab") / "fixtures" / fname
    try:
        return json.loads(ref.read_text())
    except FileNotFoundError:
        raise ConfigError(f"no bundled fixture named {name!r}") from None


def _build_functions(spec: dict) -> list[BooleanFunction]:
    m = spec.get("m")
    if m is None:
        raise ConfigError("function spec needs 'm'")
    gen = spec.get("generator")
    if gen == "id":
        return [
            make_id(m, [t for t in range(1, m + 1) if (i >> (m - t)) & 1])
            for i in range(1 << m)
        ]
    if gen == "rank":
        return [make_rank(m, r) for r in range(1 << m)]
    if gen == "bit":
        return [make_bit(m, t) for t in range(1, m + 1)]
    if gen == "and":
        return [make_and(m, sub) for sub in spec["subsets"]]
    if gen == "threshold":
        kind = spec.get("kind", "exact")
        maker = make_threshold_exact if kind == "exact" else make_threshold_atmost
        return [maker(m, b) for b in spec["betas"]]
    if "formulas" in spec:
        return [compile_formula(parse(text, m), m) for text in spec["formulas"]]
    if "file" in spec:
        with open(spec["file"]) as fh:
            return [BooleanFunction.from_json_dict(d) for d in json.load(fh)]
    raise ConfigError(f"unrecognized function spec: {spec}")


def _build_inner(spec: dict, channel, enum_cap: int):
    kind = spec.get("kind")
    if kind == "identity":
        return build_identity_code(channel, spec["n"], enum_cap=enum_cap)
    if kind == "random":
        if "seed" not in spec:
            raise ConfigError("random inner code requires a seed")
        return build_random_code(
            channel, spec["n"], spec["M"], spec["seed"], enum_cap=enum_cap
        )
    if kind == "file":
        return load_code(spec["path"])
    raise ConfigError(f"unrecognized inner-code spec: {spec}")


def canonical_report_bytes(report: dict, drop_timestamp: bool = False) -> bytes:
    rep = dict(report)
    if drop_timestamp:
        rep.pop("generated_at", None)
    return (json.dumps(rep, indent=2, sort_keys=True) + "\n").encode()


def run_pipeline(config: dict, out_dir) -> dict:
    """Build, evaluate and verify one experiment; returns the report dict.

    Writes every intermediate artifact into `out_dir`.  The report's "pass"
    field is the conjunction of all recorded checks.
    """
    for key in ("channel", "inner", "family", "functions", "evaluation"):
        if key not in config:
            raise ConfigError(f"config missing section {key!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eval_spec = config["evaluation"]
    enum_cap = 2 ** int(eval_spec.get("enum_cap_log2", 24))
    if "seed" not in eval_spec:
        raise ConfigError("evaluation requires a seed")

    channel = _stage("channel", load_channel, config["channel"])
    inner = _stage("inner", _build_inner, config["inner"], channel, enum_cap)

    fam_spec = config["family"]
    if "file" in fam_spec:
        family = _stage("family", load_family, fam_spec["file"])
    else:
        if "seed" not in fam_spec:
            raise ConfigError("family construction requires a seed")
        family = _stage(
            "family",
            build_family_greedy,
            inner.size,
            fam_spec["epsilon"],
            fam_spec["lam"],
            fam_spec["target"],
            fam_spec["seed"],
        )
    fam_report = verify_family(family)

    functions = _stage("functions", _build_functions, config["functions"])
    bfc = _stage("assemble", assemble_bfc, inner, family, functions)

    mode = eval_spec.get("mode", "exact")
    trials = int(eval_spec.get("trials", 100_000))
    seed = int(eval_spec["seed"])
    report_err = _stage(
        "evaluate",
        eval_errors,
        bfc,
        channel,
        mode,
        trials,
        seed,
        enum_cap,
    )

    inner_exact = output_space_size(channel, inner.n) <= enum_cap
    if inner_exact:
        inner_err = eval_inner_error(inner, channel, "exact", enum_cap=enum_cap)
        delta = inner_err.delta
    else:
        delta = inner.delta if inner.delta is not None else 1.0

    checks = {"family_verified": fam_report.ok}
    checks.update(check_error_bounds(bfc, report_err, delta))
    checks["identity_zero_errors"] = True
    if channel.is_permutation() and family.intersection_cap == 0 and mode == "exact":
        checks["identity_zero_errors"] = (
            (report_err.lambda1_max in (None, 0.0))
            and (report_err.lambda2_max in (None, 0.0))
        )
    ok = all(v for k, v in checks.items() if isinstance(v, bool))

    b1, b2 = proved_error_bounds(bfc, delta)
    cap_est = capacity(channel, 1e-9)
    report = {
        "schema": SCHEMA,
        "name": config.get("name", "experiment"),
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "backend": _kernels.active_backend(),
        "channel": {
            "input_size": channel.input_size,
            "output_size": channel.output_size,
            "capacity": cap_est,
        },
        "inner": {
            "n": inner.n,
            "M": inner.size,
            "delta": delta,
            "delta_mode": "exact" if inner_exact else inner.delta_mode,
        },
        "family": {
            "ground_size": family.ground_size,
            "member_size": family.member_size,
            "cap": family.intersection_cap,
            "size": family.size,
            "lambda_eff": bfc.lambda_eff,
            "max_intersection": fam_report.max_intersection,
        },
        "functions": {"count": len(functions), "m": bfc.m, "s_max": bfc.s_max},
        "evaluation": {"mode": mode, "trials": trials if mode == "monte_carlo" else None, "seed": seed},
        "errors": {
            "lambda1_max": report_err.lambda1_max,
            "lambda2_max": report_err.lambda2_max,
            "lambda1_applicable": report_err.lambda1_applicable,
            "lambda2_applicable": report_err.lambda2_applicable,
        },
        "bounds": {"lambda1": b1, "lambda2": b2},
        "checks": checks,
        "pass": ok,
    }

    # persist the bundle
    save_channel(channel, out / "channel.json")
    save_code(inner, out / "inner.json")
    save_family(family, out / "family.json")
    with open(out / "functions.json", "w") as fh:
        json.dump([f.to_json_dict() for f in functions], fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = {
        "schema": SCHEMA,
        "generated_at": report["generated_at"],
        "config": config,
        "seeds": {
            "inner": config["inner"].get("seed"),
            "family": fam_spec.get("seed"),
            "evaluation": seed,
        },
        "enum_cap": enum_cap,
        "backend": _kernels.active_backend(),
        "delta": delta,
        "lambda_eff": bfc.lambda_eff,
        "s_max": bfc.s_max,
        "implied_xi": float(cap_est - np.log2(inner.size) / inner.n),
        "artifacts": [
            "channel.json",
            "inner.json",
            "family.json",
            "functions.json",
            "report.json",
            "report_pairs.csv",
        ],
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "report.json", "wb") as fh:
        fh.write(canonical_report_bytes(report))
    with open(out / "report_pairs.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "error_type", "value", "cp_low", "cp_high"])
        for row in report_err.pair_rows():
            writer.writerow(
                [repr(float(v)) if isinstance(v, float) else v for v in row]
            )
    return report
