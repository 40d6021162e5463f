"""Command-line interface.

Exit codes: 0 success, 1 a verified claim failed, 2 input error,
3 resource guard hit, 4 mathematical precondition violated.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from fractions import Fraction
from typing import Dict, List, Optional

from . import __version__
from .analysis import (DEFAULT_MAX_PARTITION_SIZE, has_bound_information,
                       lopc_formable, multipartition_distillable, noncoop_distillable,
                       theorem6_channel)
from .errors import DomainError, PreconditionError, ResourceError
from .intrinsic import OptimizerConfig, intrinsic_information_upper
from .io import (load_distribution, load_omega, omega_to_json, read_key_value, sha256_of,
                 write_json)
from .omega import (GroupConfig, OmegaParams, associated_codes, build_omega_distribution,
                    enumerate_group_configs)
from .prob import apply_channel_to_eve, total_variation_distance
from .scenarios import CATALOG, build_scenario, verify_scenario

EXIT_OK, EXIT_CLAIM, EXIT_INPUT, EXIT_RESOURCE, EXIT_PRECONDITION = 0, 1, 2, 3, 4

# flag defaults, applied after the --config file
DEFAULTS = {
    "seed": 0, "blocks": 100000, "block_size": 10, "epsilon_eve": 1e-9, "target_accepted": None,
    "bootstrap": 1000, "rounds": 1000000, "restarts": 20, "max_steps": 400, "tolerance": 1e-10,
    "eve_output_size": None, "groups": None, "max_partition_size": DEFAULT_MAX_PARTITION_SIZE,
}
_TYPES = {"seed": int, "blocks": int, "block_size": int, "epsilon_eve": float, "target_accepted": int,
          "bootstrap": int, "rounds": int, "restarts": int, "max_steps": int, "tolerance": float,
          "eve_output_size": int, "groups": str, "max_partition_size": int}


class InputError(Exception):
    pass


def _settings(args, keys) -> Dict[str, object]:
    """Merge flags over the --config file over the defaults."""
    file_values = read_key_value(args.config) if getattr(args, "config", None) else {}
    unknown = set(file_values) - set(_TYPES)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None and key in file_values:
            raw = file_values[key]
            try:
                value = None if raw.lower() in ("", "none") else _TYPES[key](raw)
            except ValueError as exc:
                raise InputError(f"config value {key}={raw!r} is not a {_TYPES[key].__name__}") from exc
        out[key] = DEFAULTS[key] if value is None else value
    return out


def _provenance(args, paths: List[str], seed=None) -> dict:
    out = {"tool": "secretcorr", "version": __version__, "inputs": {p: sha256_of(p) for p in paths}}
    if seed is not None:
        out["seed"] = seed
    if getattr(args, "config", None):
        out["inputs"][args.config] = sha256_of(args.config)
    return out


def _emit(args, report: dict):
    text = json.dumps(report, indent=2)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _verdict_json(params: OmegaParams, config: GroupConfig) -> dict:
    verdict = noncoop_distillable(params, config)
    out = {"groups": str(config), "distillable": verdict.answer}
    out.update({k: v for k, v in verdict.to_json().items() if k != "answer"})
    if verdict.code is not None:
        out["zprime"] = out.pop("code")
        out["associated_codes"] = [str(c) for c in associated_codes(verdict.code, config)]
        if not config.noncooperators:
            out["code"] = out["associated_codes"][0]
    return out


def cmd_construct(args) -> int:
    if args.omega:
        if args.n is None:
            raise InputError("--omega needs --n")
        params = OmegaParams.from_strings(args.n, [t.strip() for t in args.omega.split(",")])
        name = "custom"
    elif args.source and args.source.endswith(".json"):
        params, name = load_omega(args.source), args.source
    elif args.source:
        scenario = build_scenario(args.source, n=args.n, m=args.m, k=args.k, i=args.i, j=args.j,
                                  together=not args.separated)
        params, name = scenario.params, scenario.name
    else:
        raise InputError("give a scenario name, an omega file or --omega")
    data = omega_to_json(params)
    total = sum(params.omega)
    print(f"{name}: n={params.n}, sum(Omega) = {total} (normalized: {total == Fraction(1, 2)})",
          file=sys.stderr if not args.output else sys.stdout)
    if args.output:
        write_json(args.output, data)
    else:
        print(json.dumps(data, indent=2))
    return EXIT_OK


def cmd_analyze(args) -> int:
    opts = _settings(args, ["groups", "max_partition_size"])
    params = load_omega(args.omega_file)
    report = {"provenance": _provenance(args, [args.omega_file]), "n": params.n}
    if args.all_configs:
        if params.n > opts["max_partition_size"]:
            raise ResourceError(f"n={params.n} exceeds max_partition_size={opts['max_partition_size']}")
        report["formable"] = lopc_formable(params).to_json()
        report["bound_information"] = has_bound_information(params, opts["max_partition_size"],
                                                            joint_groups=args.joint_groups)
        report["configs"] = [_verdict_json(params, c) for c in enumerate_group_configs(params.n)]
    elif opts["groups"]:
        config = GroupConfig.parse(opts["groups"], params.n)
        entry = _verdict_json(params, config)
        if config.covers_all:
            entry["multipartition"] = multipartition_distillable(params, config).to_json()
        report["configs"] = [entry]
        report["distillable"] = entry["distillable"]
    else:
        raise InputError("analyze needs --groups or --all-configs")
    if args.format == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["groups", "distillable", "zprime", "lhs", "relation", "rhs"])
        for e in report["configs"]:
            ineq = e.get("inequality", {})
            writer.writerow([e["groups"], e["distillable"], e.get("zprime", ""), ineq.get("lhs", ""),
                             ineq.get("relation", ""), ineq.get("rhs", "")])
        text = buf.getvalue()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(args, report)
    return EXIT_OK


def _parse_split(text: str):
    parts = text.split("|")
    if len(parts) != 2:
        raise InputError(f"split must have two sides, got {text!r}")
    try:
        return tuple(frozenset(int(p) for p in side.split(",")) for side in parts)
    except ValueError as exc:
        raise InputError(f"bad split {text!r}") from exc


def cmd_intrinsic(args) -> int:
    opts = _settings(args, ["restarts", "max_steps", "tolerance", "eve_output_size", "seed"])
    dist = load_distribution(args.dist_file)
    x, y = _parse_split(args.split)
    opt = OptimizerConfig(restarts=opts["restarts"], max_steps=opts["max_steps"],
                          tolerance=opts["tolerance"], eve_output_size=opts["eve_output_size"],
                          seed=opts["seed"])
    bound = intrinsic_information_upper(dist, (x, y), opt)
    report = {"provenance": _provenance(args, [args.dist_file], opts["seed"]), "split": args.split,
              "optimizer": {k: opts[k] for k in ("restarts", "max_steps", "tolerance", "eve_output_size")}}
    report.update(bound.to_json())
    _emit(args, report)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .sim import SimConfig, run_distillation

    opts = _settings(args, ["seed", "blocks", "block_size", "groups", "epsilon_eve", "target_accepted",
                            "bootstrap"])
    params = load_omega(args.omega_file)
    if not opts["groups"]:
        raise InputError("simulate needs --groups")
    config = GroupConfig.parse(opts["groups"], params.n)
    sim = SimConfig(seed=opts["seed"], rounds=opts["blocks"], block_size=opts["block_size"],
                    config=config, epsilon_eve=opts["epsilon_eve"],
                    target_accepted=opts["target_accepted"], bootstrap=opts["bootstrap"])
    result = run_distillation(params, sim)
    report = {"provenance": _provenance(args, [args.omega_file], sim.seed)}
    report.update(result.to_json())
    report["rate_ci_excludes_zero"] = bool(result.rate_ci[0] > 0)
    _emit(args, report)
    return EXIT_OK


def cmd_form(args) -> int:
    from .sim import run_formation

    opts = _settings(args, ["seed", "rounds"])
    params = load_omega(args.omega_file)
    empirical, target = run_formation(params, opts["rounds"], opts["seed"])
    channel_ok = apply_channel_to_eve(build_omega_distribution(params), theorem6_channel(params)) == target
    tv = total_variation_distance(empirical, target)
    bound = 4 * (len(target) / opts["rounds"]) ** 0.5
    report = {"provenance": _provenance(args, [args.omega_file], opts["seed"]), "rounds": opts["rounds"],
              "tv_distance": tv, "tv_bound": bound, "within_bound": tv < bound,
              "channel_reproduces_target": channel_ok, "support": len(target)}
    _emit(args, report)
    return EXIT_OK


def _scenario_from_args(args):
    if args.name not in CATALOG:
        raise InputError(f"unknown scenario {args.name!r}; known: {', '.join(sorted(CATALOG))}")
    return build_scenario(args.name, n=args.n, m=args.m, k=args.k, i=args.i, j=args.j,
                          together=not args.separated)


def cmd_demo(args) -> int:
    scenario = _scenario_from_args(args)
    results = verify_scenario(scenario)
    report = {"scenario": scenario.name, "notes": scenario.notes, "omega": omega_to_json(scenario.params),
              "claims": [{"claim": c.describe(), "predicate": got, "holds": got == c.expected}
                         for c, got in results]}
    _emit(args, report)
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _scenario_from_args(args)
    results = verify_scenario(scenario)
    bad = 0
    for claim, got in results:
        ok = got == claim.expected
        bad += not ok
        if args.verbose or not ok:
            print(f"{'PASS' if ok else 'FAIL'}  {claim.describe()}  (predicate: {got})")
    print(f"{scenario.name}: {len(results) - bad}/{len(results)} claims hold -> {'pass' if not bad else 'fail'}")
    return EXIT_OK if not bad else EXIT_CLAIM


def _scenario_flags(p):
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--separated", action="store_true", help="example5: parties i, j must stay apart")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secretcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="write an omega parameter file")
    p.add_argument("source", nargs="?", help="scenario name or omega file")
    _scenario_flags(p)
    p.add_argument("--omega", help="comma-separated fractions, with --n")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="exact distillability verdicts")
    p.add_argument("omega_file")
    p.add_argument("--groups", help='grouping such as "1,2|3"; omitted parties idle')
    p.add_argument("--all-configs", action="store_true")
    p.add_argument("--joint-groups", action="store_true",
                   help="let parties meet when deciding bound information")
    p.add_argument("--max-partition-size", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("intrinsic", help="upper bound on intrinsic information")
    p.add_argument("dist_file", help="distribution or omega file")
    p.add_argument("--split", required=True, help='two sides such as "2|1,3"')
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--eve-output-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_intrinsic)

    p = sub.add_parser("simulate", help="repeated-code distillation run")
    p.add_argument("omega_file")
    p.add_argument("--groups")
    p.add_argument("-N", "--block-size", type=int, dest="block_size")
    p.add_argument("--blocks", type=int, help="cap on scanned blocks")
    p.add_argument("--target-accepted", type=int)
    p.add_argument("--epsilon-eve", type=float)
    p.add_argument("--bootstrap", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("form", help="LOPC formation run")
    p.add_argument("omega_file")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_form)

    for name, func, helptext in (("demo", cmd_demo, "show a catalog scenario"),
                                 ("verify", cmd_verify, "check every claim of a scenario")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("name")
        _scenario_flags(p)
        p.add_argument("-v", "--verbose", action="store_true")
        p.add_argument("-o", "--output")
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.detail and exc.detail not in str(exc):
            print(f"  {exc.detail}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, DomainError, OSError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
