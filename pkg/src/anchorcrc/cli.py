"""Command-line entry point.

Exit codes: 0 success, 2 input validation failure, 3 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import formats
from .analysis import ADJUSTMENTS, DEFAULT_METHODS, METHODS, AnalysisConfig, run_analysis
from .model import ValidationError, tabulate
from .presets import get_preset, list_presets
from .simulation import SimScenario, run_scenario

SEED_ENV = "ANCHORCRC_SEED"
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _population(raw: str | None):
    """``1029`` or ``A=500,B=529``."""
    if raw is None:
        return None
    if "=" not in raw:
        return int(raw)
    sizes = {}
    for part in raw.split(","):
        key, _, value = part.partition("=")
        sizes[key.strip()] = int(value)
    return sizes


def _csv_list(raw: str, allowed) -> tuple[str, ...]:
    items = tuple(x.strip() for x in raw.split(",") if x.strip())
    bad = [x for x in items if x not in allowed]
    if bad:
        raise ValidationError(f"unknown value(s) {bad}; choose from {list(allowed)}")
    return items


def _input_mode(path: str, mode: str | None) -> str:
    if mode:
        return mode
    return "records" if path.endswith((".csv", ".tsv")) else "counts"


def cmd_estimate(args) -> str:
    config = AnalysisConfig(
        input=args.input,
        mode=_input_mode(args.input, args.mode),
        methods=_csv_list(args.methods, METHODS),
        level=args.level,
        draws=args.draws,
        seed=args.seed if args.seed is not None else _default_seed(),
        adjustments=_csv_list(args.adjustment, ADJUSTMENTS),
        stratify_by=args.stratify_by,
        population=_population(args.population),
        psi=args.psi,
        output_format=args.format,
    )
    return run_analysis(config)


def cmd_tabulate(args) -> str:
    records = formats.parse_records(args.input, stratum_column=args.stratify_by or "stratum")
    population = _population(args.population)
    if population is None:
        raise ValidationError("--population is required")
    if args.stratify_by:
        tables = tabulate(records, population, by_stratum=True)
        return json.dumps({k: v.to_dict() for k, v in tables.items()}, indent=2) + "\n"
    return formats.render_counts(tabulate(records, population), "json")


def cmd_simulate(args) -> str:
    if args.preset:
        scenario = get_preset(args.preset)
    else:
        if args.n_tot is None or args.n_true is None or args.anchor_size is None:
            raise ValidationError("give --preset or all of --n-tot, --n-true, --anchor-size")
        scenario = SimScenario(n_tot=args.n_tot, n_true=args.n_true, anchor_size=args.anchor_size)
    changes = {"master_seed": args.seed if args.seed is not None else _default_seed()}
    for attr in ("p_symp_case", "p_symp_noncase", "p_s1_symp", "p_s1_asymp", "level"):
        value = getattr(args, attr)
        if value is not None:
            changes[attr] = value
    if args.replications is not None:
        changes["replications"] = args.replications
    if args.draws is not None:
        changes["credible_draws"] = args.draws
    summary = run_scenario(scenario.with_(**changes), workers=args.workers)
    return formats.render_summary(summary, args.format)


def cmd_presets(args) -> str:
    return "".join(f"{name}\n" for name in list_presets())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchorcrc",
        description="Anchor-stream capture-recapture estimation of case counts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate N from a counts document or records file")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("counts", "records"))
    p.add_argument("--format", choices=("json", "csv", "markdown"), default="markdown")
    p.add_argument("--seed", type=int)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--adjustment", default=",".join(ADJUSTMENTS),
                   help="credible-interval adjustments, comma separated")
    p.add_argument("--methods", default=",".join(DEFAULT_METHODS))
    p.add_argument("--stratify-by")
    p.add_argument("--population", help="population size, or STRATUM=SIZE,... for strata")
    p.add_argument("--psi", type=float, help="anchor sampling probability for the 4-cell method")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("tabulate", help="cross-classify a records file into cell counts")
    p.add_argument("--input", required=True)
    p.add_argument("--population")
    p.add_argument("--stratify-by")
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    p.add_argument("--preset")
    p.add_argument("--n-tot", type=int)
    p.add_argument("--n-true", type=int)
    p.add_argument("--anchor-size", type=int)
    p.add_argument("--p-symp-case", type=float)
    p.add_argument("--p-symp-noncase", type=float)
    p.add_argument("--p-s1-symp", type=float)
    p.add_argument("--p-s1-asymp", type=float)
    p.add_argument("--replications", type=int)
    p.add_argument("--draws", type=int)
    p.add_argument("--level", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv", "markdown"), default="markdown")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("presets", help="list named simulation scenarios")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
