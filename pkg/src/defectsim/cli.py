"""Command-line interface.

Two subcommands:

* ``defectsim run`` — execute an experiment grid and write the report
  tables.  Options come from built-in defaults, overridden by a flat
  ``key = value`` config file (``--config``), overridden by command-line
  flags.  Exits 0 only if every grid cell succeeded.
* ``defectsim generate`` — write a synthetic dataset as a CSV file in the
  same layout ``run`` accepts via ``--dataset``.

Synthetic dataset specs use the compact form ``N:RATE:FEATURES:SEP`` with an
optional fifth ``:SEED`` part, e.g. ``200:0.3:10:1.5``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .datasets import generate_synthetic, save_csv
from .experiment import (
    FORMATS,
    STRATEGIES,
    CsvSpec,
    ExperimentConfig,
    SyntheticSpec,
    render_report,
    run_experiment,
)

_CONFIG_KEYS = {
    "dataset",
    "synthetic",
    "seed",
    "reps",
    "strategies",
    "type1",
    "type2",
    "out",
    "format",
    "trace",
}


def parse_synthetic_spec(text: str) -> SyntheticSpec:
    """Parse ``N:RATE:FEATURES:SEP[:SEED]`` into a :class:`SyntheticSpec`."""
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise ValueError(
            f"synthetic spec must be N:RATE:FEATURES:SEP[:SEED], got {text!r}"
        )
    try:
        n_modules = int(parts[0])
        defect_rate = float(parts[1])
        n_features = int(parts[2])
        separation = float(parts[3])
        seed = int(parts[4]) if len(parts) == 5 else None
    except ValueError as error:
        raise ValueError(f"bad synthetic spec {text!r}: {error}") from None
    return SyntheticSpec(
        n_modules=n_modules,
        defect_rate=defect_rate,
        n_features=n_features,
        separation=separation,
        seed=seed,
    )


def parse_config_file(path: str | Path) -> dict[str, list[str]]:
    """Read a flat ``key = value`` file; repeated keys accumulate in order."""
    values: dict[str, list[str]] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(
                f"{path}: line {lineno}: unknown key {key!r}; expected one of "
                f"{sorted(_CONFIG_KEYS)}"
            )
        values.setdefault(key, []).append(value)
    return values


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, config file and CLI flags into an ExperimentConfig."""
    file_values: dict[str, list[str]] = {}
    if args.config:
        file_values = parse_config_file(args.config)

    def last(key: str) -> str | None:
        return file_values[key][-1] if key in file_values else None

    dataset_args = list(args.dataset or []) or file_values.get("dataset", [])
    synthetic_args = list(args.synthetic or []) or file_values.get("synthetic", [])
    datasets: list[CsvSpec | SyntheticSpec] = [CsvSpec(path=p) for p in dataset_args]
    datasets += [parse_synthetic_spec(s) for s in synthetic_args]

    seed = args.seed if args.seed is not None else last("seed")
    reps = args.reps if args.reps is not None else last("reps")
    strategies = args.strategies if args.strategies is not None else last("strategies")
    type1 = args.type1 if args.type1 is not None else last("type1")
    type2 = args.type2 if args.type2 is not None else last("type2")
    out = args.out if args.out is not None else last("out")
    formats = args.format if args.format is not None else last("format")
    trace = args.trace or (_parse_bool(last("trace")) if last("trace") is not None else False)

    kwargs: dict[str, object] = {}
    if datasets:
        kwargs["datasets"] = tuple(datasets)
    if seed is not None:
        kwargs["master_seed"] = int(seed)
    if reps is not None:
        kwargs["repetitions"] = int(reps)
    if strategies is not None:
        kwargs["strategies"] = tuple(_csv_list(str(strategies)))
    if type1 is not None:
        kwargs["type1_probs"] = tuple(float(v) for v in _csv_list(str(type1)))
    if type2 is not None:
        kwargs["type2_prob"] = float(type2)
    if out is not None:
        kwargs["output_dir"] = str(out)
    if formats is not None:
        kwargs["formats"] = tuple(_csv_list(str(formats)))
    kwargs["dump_traces"] = bool(trace)
    kwargs["verbose"] = not args.quiet
    return ExperimentConfig(**kwargs)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defectsim",
        description="Online defect-prediction simulator with imperfect test feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run an experiment grid and write report tables")
    run_parser.add_argument("--config", help="flat key = value config file")
    run_parser.add_argument(
        "--dataset", action="append", metavar="CSV",
        help="module-metric CSV file (repeatable)",
    )
    run_parser.add_argument(
        "--synthetic", action="append", metavar="N:RATE:FEATURES:SEP[:SEED]",
        help="synthetic dataset spec (repeatable)",
    )
    run_parser.add_argument("--seed", type=int, help="master seed for the whole grid")
    run_parser.add_argument("--reps", type=int, help="repetitions per cell")
    run_parser.add_argument(
        "--strategies", help=f"comma-separated subset of {','.join(STRATEGIES)}",
    )
    run_parser.add_argument(
        "--type1", help="comma-separated Type-1 overlook probabilities, e.g. 0.2,0.6,1.0",
    )
    run_parser.add_argument("--type2", type=float, help="Type-2 overlook probability")
    run_parser.add_argument("--out", help="output directory for report files")
    run_parser.add_argument(
        "--format", help=f"comma-separated subset of {','.join(FORMATS)}",
    )
    run_parser.add_argument(
        "--trace", action="store_true", help="also dump one CSV trace per run",
    )
    run_parser.add_argument(
        "--quiet", action="store_true", help="suppress progress output on stderr",
    )

    gen_parser = sub.add_parser("generate", help="write a synthetic dataset CSV")
    gen_parser.add_argument(
        "--synthetic", metavar="N:RATE:FEATURES:SEP[:SEED]",
        default="200:0.3:10:1.5",
        help="synthetic dataset spec (default: %(default)s)",
    )
    gen_parser.add_argument("--seed", type=int, default=0, help="generation seed")
    gen_parser.add_argument("--name", default="synthetic", help="dataset name")
    gen_parser.add_argument("--out", required=True, metavar="FILE", help="output CSV path")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            spec = parse_synthetic_spec(args.synthetic)
            seed = spec.seed if spec.seed is not None else args.seed
            dataset = generate_synthetic(
                spec.n_modules,
                spec.defect_rate,
                spec.n_features,
                spec.separation,
                seed=seed,
                name=args.name,
            )
            save_csv(dataset, args.out)
            print(f"wrote {len(dataset)} modules to {args.out}")
            return 0

        config = build_experiment_config(args)
        report = run_experiment(config)
        written = render_report(report)
        for path in written:
            print(path)
        if not report.ok:
            problems = len(report.failures) + len(report.dataset_errors)
            print(f"completed with {problems} failed grid entries; see provenance.txt",
                  file=sys.stderr)
            return 1
        return 0
    except (ValueError, OSError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
