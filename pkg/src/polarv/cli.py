"""Command-line entry point: ``polarv {measure,transform,sweep,polarize,validate}``.

Exit status is 0 on success, 1 when a validation or resource check fails, and 2
for usage or input-file errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .battery import run_battery
from .dist import classify, make_bec, make_bsc
from .fileio import SWEEP_COLUMNS, ParseError, SweepSpec, load_distribution, sweep_csv
from .polar2 import transform_report
from .tree import AtomBudgetError, QuantizeConfig, polarize_iid

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _measure_dict(F) -> dict:
    c = classify(F)
    d = {"H": F.conditional_entropy(), "V": F.varentropy(), "class": c.tag.value}
    if c.param is not None:
        d["param"] = c.param
    return d


def cmd_measure(args) -> int:
    F = load_distribution(args.dist)
    _emit(json.dumps(_measure_dict(F)) + "\n", args.out)
    return EXIT_OK


def cmd_transform(args) -> int:
    F1 = load_distribution(args.dist1)
    F2 = load_distribution(args.dist2)
    report = transform_report(F1, F2)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cols = tuple(c.strip() for c in args.columns.split(",") if c.strip())
    spec = SweepSpec(args.channel, args.start, args.end, args.step, cols)
    _emit(sweep_csv(spec), args.out)
    return EXIT_OK


def _parse_quantize(value: str):
    if value.lower() == "off":
        return None
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'off'") from None
    return QuantizeConfig(max_atoms=k, bin_count=k)


def cmd_polarize(args) -> int:
    if args.dist is not None:
        F0 = load_distribution(args.dist)
    elif args.channel is not None and args.eps is not None:
        F0 = (make_bsc if args.channel == "bsc" else make_bec)(args.eps)
    else:
        raise ParseError("polarize needs --dist, or --channel with --eps")
    try:
        trace = polarize_iid(F0, args.levels, args.delta, quantize_cfg=args.quantize)
    except AtomBudgetError as exc:
        print(f"polarv: {exc} (e.g. --quantize 4096)", file=sys.stderr)
        return EXIT_FAIL
    if args.out is None:
        sys.stdout.write(trace.to_csv())
    else:
        prefix = Path(args.out)
        prefix.with_suffix(".csv").write_text(trace.to_csv())
        prefix.with_suffix(".json").write_text(trace.to_json() + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_battery(args.trials, args.atoms, args.seed)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    if not report["passed"]:
        for check in report["checks"]:
            if check["hard"] and not check["passed"]:
                for f in check["failures"]:
                    print(f"FAIL {check['name']}: {json.dumps(f)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _positive_int(value: str) -> int:
    k = int(value)
    if k < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return k


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="entropy, varentropy and class of a distribution file")
    p.add_argument("--dist", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("transform", help="size-2 transform report as JSON")
    p.add_argument("--dist1", required=True)
    p.add_argument("--dist2", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("sweep", help="varentropy/covariance curves for BSC or BEC")
    p.add_argument("--channel", choices=("bsc", "bec"), required=True)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--end", type=float, default=None)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--columns", default=",".join(SWEEP_COLUMNS))
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("polarize", help="average-varentropy trace over 2^n i.i.d. copies")
    p.add_argument("--dist")
    p.add_argument("--channel", choices=("bsc", "bec"))
    p.add_argument("--eps", type=float)
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--quantize", type=_parse_quantize, default=None,
                   help="atom cap and bin count, or 'off' (default) for exact evolution")
    p.add_argument("--out", help="output prefix; writes PREFIX.csv and PREFIX.json")
    p.set_defaults(func=cmd_polarize)

    p = sub.add_parser("validate", help="run the property battery")
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--atoms", type=_positive_int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "end", "unset") is None:
        args.end = 0.5 if args.channel == "bsc" else 1.0
    try:
        return args.func(args)
    except (ParseError, ValueError) as exc:
        print(f"polarv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
