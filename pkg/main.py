#!/usr/bin/env python3
"""
lcirt - Latent-class item response models

Estimates multidimensional latent-class IRT models (graded response and
partial credit families, Rasch-type and rating-scale variants, and the
standard latent class model) by EM, and selects models by BIC,
likelihood-ratio tests and hierarchical clustering of items.

Usage:
    python main.py aggregate data.csv                      # Distinct patterns
    python main.py fit data.csv -k 3 --link global         # Fit one model
    python main.py test-dim data.csv -k 3 --multi1 "1,3;2,4"
    python main.py cluster data.csv -k 4 --disc free --format text
    python main.py grid data.csv --grid grid.yaml
    python main.py simulate --truth truth.json -n 1000 -o sim.csv
"""
import argparse
import sys
from pathlib import Path

from pydantic import ValidationError

from src.schemas import ModelSpecSchema
from src.services import EXIT_INVALID, RunConfig, run
from src.data import read_json
from src.utils import LcirtError, config, get_logger

logger = get_logger("main")


def parse_groups(text: str | None):
    """'1,2,3;4,5' -> [[1, 2, 3], [4, 5]]; keywords pass through."""
    if text is None:
        return None
    text = text.strip()
    if text in ("unidimensional", "each-item"):
        return text
    try:
        return [[int(j) for j in group.split(",") if j.strip()] for group in text.split(";") if group.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Cannot read groups {text!r}; use e.g. '1,2,3;4,5'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", type=Path, help="Response CSV or aggregated JSON")
    common.add_argument("-o", "--output", type=Path, help="Output file (stdout when omitted)")
    common.add_argument("--format", dest="fmt", default="json", choices=["json", "text", "dot"],
                        help="Output format")
    common.add_argument("--missing-code", type=int, help=f"Missing sentinel (default {config.missing_code})")
    common.add_argument("--header", action=argparse.BooleanOptionalAction, default=None,
                        help="Whether the CSV has a header line (detected by default)")
    common.add_argument("--threads", type=int, help="Worker threads (default LCIRT_THREADS)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--spec", type=Path, help="Model spec JSON; flags override its fields")
    model.add_argument("-k", type=int, help="Number of latent classes")
    model.add_argument("--link", help="none | global | local (or 0/1/2)")
    model.add_argument("--disc", help="constrained | free (or 0/1)")
    model.add_argument("--difl", help="free | rs (or 0/1)")
    model.add_argument("--multi", type=parse_groups, help="Dimension groups, e.g. '1,2,3;4,5'")
    model.add_argument("--start", type=int, default=0, choices=[0, 1, 2],
                       help="0 deterministic, 1 random, 2 user parameters")
    model.add_argument("--n-random", type=int, help="Number of random starts")
    model.add_argument("--seed", type=int, help="Base seed of the random starts")
    model.add_argument("--params", type=Path, help="Parameter JSON for --start 2")
    model.add_argument("--tol", type=float, help=f"Relative log-likelihood tolerance (default {config.tol})")
    model.add_argument("--max-iter", type=int, help=f"Iteration cap (default {config.max_iter})")

    parser = argparse.ArgumentParser(
        description="Latent-class item response models: estimation and model selection",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py aggregate naep.csv -o naep.json
  python main.py fit hads.csv -k 3 --link global --disc constrained --difl free
  python main.py test-dim hads.csv -k 3 --disc free --multi0 unidimensional --multi1 "1,3,5,6,8,10,11;2,4,7,9,12,13,14"
  python main.py cluster naep.csv -k 4 --disc free --format text
  python main.py grid hads.csv --grid grid.yaml --format text
  python main.py simulate --truth truth.json -n 2000 --seed 7 -o sim.csv
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("aggregate", parents=[common], help="Aggregate identical response patterns")
    sub.add_parser("fit", parents=[common, model], help="Fit one model")

    td = sub.add_parser("test-dim", parents=[common, model], help="LR test of dimension structures")
    td.add_argument("--multi0", type=parse_groups, help="Restricted structure (unidimensional by default)")
    td.add_argument("--multi1", type=parse_groups, help="General structure (defaults to --multi)")

    cl = sub.add_parser("cluster", parents=[common, model], help="Hierarchical clustering of items")
    cl.add_argument("--alpha", type=float, help=f"Threshold of the cut rule (default {config.alpha})")
    cl.add_argument("--progress", action="store_true", help="Show a progress bar")

    gr = sub.add_parser("grid", parents=[common, model], help="Information-criteria table over a model grid")
    gr.add_argument("--grid", required=True, type=Path, help="Grid YAML or JSON")

    sim = sub.add_parser("simulate", parents=[common], help="Simulate responses from a known model")
    sim.add_argument("--truth", required=True, type=Path, help="Truth JSON (spec and params)")
    sim.add_argument("-n", type=int, help="Number of units")
    sim.add_argument("--seed", type=int, help="Seed")
    sim.add_argument("--missing-rate", type=float, help="Probability of a missing cell")
    sim.add_argument("--truth-output", type=Path, help="Where to write the truth JSON")
    return parser


def spec_from_args(args) -> ModelSpecSchema | None:
    """Merge --spec with the individual model flags."""
    base = read_json(args.spec) if getattr(args, "spec", None) else {}
    overrides = {
        "k": getattr(args, "k", None),
        "link": getattr(args, "link", None),
        "disc": getattr(args, "disc", None),
        "difl": getattr(args, "difl", None),
        "multi": getattr(args, "multi", None),
    }
    merged = {**base, **{key: v for key, v in overrides.items() if v is not None}}
    if "k" not in merged:
        return None
    return ModelSpecSchema.model_validate(merged)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            input=args.input,
            output=args.output,
            fmt=args.fmt,
            spec=spec_from_args(args),
            start=getattr(args, "start", 0),
            n_random=getattr(args, "n_random", None),
            seed=getattr(args, "seed", None),
            params=getattr(args, "params", None),
            tol=getattr(args, "tol", None),
            max_iter=getattr(args, "max_iter", None),
            threads=args.threads,
            missing_code=args.missing_code,
            header=args.header,
            multi0=getattr(args, "multi0", None),
            multi1=getattr(args, "multi1", None),
            alpha=getattr(args, "alpha", None),
            grid=getattr(args, "grid", None),
            truth=getattr(args, "truth", None),
            n=getattr(args, "n", None),
            missing_rate=getattr(args, "missing_rate", None),
            truth_output=getattr(args, "truth_output", None),
            progress=getattr(args, "progress", False),
        )
    except ValidationError as e:
        first = e.errors()[0]
        logger.error(f"Invalid field {'.'.join(str(p) for p in first['loc'])}: {first['msg']}")
        return EXIT_INVALID
    except (LcirtError, FileNotFoundError, ValueError) as e:
        logger.error(str(e))
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
