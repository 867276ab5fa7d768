"""Command-line entry point: ``ffharm <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import exponents as ex
from .errors import FFError
from .experiments import SUITES, ExperimentConfig, generate_field_matrix, run
from .ffcore import field_of_order, radius_class
from .lattice import Cone, ParaboloidTranslate, space, variety_mask, variety_sizes

SUITE_COMMANDS = ("incidence", "cone", "energy", "extension", "distance", "coverage")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; command-line flags override it")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out-dir", help="directory for CSV and summary.json")
    p.add_argument("--exploratory", action="store_true", help="run cells outside the stated hypotheses")
    p.add_argument("--cap", type=int, help="skip (q, d) with q^d above this")
    p.add_argument("--q", type=int, nargs="+", help="explicit list of field orders")
    p.add_argument("--d", type=int, nargs="+", dest="dims", help="dimensions")
    p.add_argument("--trials", type=int, help="random trials per cell")
    p.add_argument("--workers", type=int, help="suites run in parallel across this many processes")


def _config(args, suites: list[str]) -> ExperimentConfig:
    base = {}
    if args.config:
        base = asdict(ExperimentConfig.load(args.config))
    if not args.config or args.command != "verify-all":
        base["suites"] = suites
    for key in ("seed", "cap", "trials", "workers", "dims"):
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    if args.out_dir:
        base["out_dir"] = args.out_dir
    if args.q:
        base["field_matrix"] = {"q": args.q}
    if args.exploratory:
        base["exploratory"] = True
    return ExperimentConfig.from_dict(base)


def _print_report(report, out_dir: str) -> None:
    for name, s in report.suites.items():
        n_ok = sum(c.passed for c in s.checks)
        print(f"{name}: {n_ok}/{len(s.checks)} checks passed, {len(s.rows)} rows")
        for c in s.checks:
            if not c.passed:
                print(f"  FAIL {c.name} {c.detail}")
        if s.skipped:
            print(f"  skipped {len(s.skipped)} cell(s); first: {s.skipped[0]}")
    for crit, e in report.criteria().items():
        print(f"criterion {crit}: {'PASS' if e['passed'] else 'FAIL'} ({e['checks']} checks)")
    print(f"reports written to {out_dir}")


def cmd_fields(args) -> int:
    filters: dict = {}
    if args.config:
        filters = ExperimentConfig.load(args.config).field_matrix
    if args.q:
        filters = {"q": args.q}
    elif args.max_q is not None:
        filters = {"max_q": args.max_q}
    if args.mod4 is not None:
        filters["mod4"] = args.mod4
    if args.prime_only:
        filters["prime_only"] = True
    if args.even:
        filters["parity"] = "even"
    if not filters:
        filters = {"max_q": 30}
    for p, k in generate_field_matrix(filters):
        print(f"q={p**k} p={p} k={k} q_mod_4={p**k % 4}")
    return 0


def cmd_variety(args) -> int:
    f = field_of_order(args.q)
    sp = space(f, args.d)
    if sp.size > (args.cap or 2**22):
        raise FFError(f"q^d = {sp.size} exceeds the cap")
    out = {
        "q": f.q, "d": args.d,
        "spheres": {str(j): {"size": n, "radius_class": radius_class(f, j)}
                    for j, n in variety_sizes(sp).items()},
        "paraboloid": int(variety_mask(sp, ParaboloidTranslate(0)).sum()) if args.d >= 2 else None,
        "cone": int(variety_mask(sp, Cone(args.d)).sum()) if args.d >= 2 else None,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_suite(args) -> int:
    suites = list(SUITES) if args.command == "verify-all" else [args.command]
    cfg = _config(args, suites)
    report = run(cfg)
    _print_report(report, cfg.out_dir)
    return report.exit_code


def cmd_exponents(args) -> int:
    if args.out:
        ex.dump_catalog(args.out, args.max_d)
        print(f"catalog for d <= {args.max_d} written to {args.out}")
        return 0
    dims = [args.dim] if args.dim else list(range(2, args.max_d + 1))
    records = [ex.catalog(d, qc, rc).to_json()
               for d in dims for qc in ((args.q_class,) if args.q_class else (1, 3))
               for rc in ((args.radius,) if args.radius else ex.RADIUS_CLASSES)]
    print(json.dumps(records, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffharm", description="Finite-field extension and incidence experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fields", help="list field orders matching a filter")
    p.add_argument("--config")
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--max-q", type=int)
    p.add_argument("--mod4", type=int, help="keep q with q mod 4 equal to this")
    p.add_argument("--prime-only", action="store_true")
    p.add_argument("--even", action="store_true", help="ask for even q (always empty)")
    p.set_defaults(func=cmd_fields)

    p = sub.add_parser("variety", help="sizes of spheres, the paraboloid and the cone")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_variety)

    for name in SUITE_COMMANDS + ("verify-all",):
        p = sub.add_parser(name, help="run every suite" if name == "verify-all" else f"run the {name} suite")
        _common(p)
        p.set_defaults(func=cmd_suite)

    p = sub.add_parser("exponents", help="print or dump the exponent catalog")
    p.add_argument("--dim", type=int)
    p.add_argument("--q-class", type=int, choices=(1, 3))
    p.add_argument("--radius", choices=ex.RADIUS_CLASSES)
    p.add_argument("--max-d", type=int, default=20)
    p.add_argument("--out", help="write the full catalog as JSON here")
    p.set_defaults(func=cmd_exponents)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FFError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
