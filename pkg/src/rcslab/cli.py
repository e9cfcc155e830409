"""Command-line interface for rcslab."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from rcslab.core.config import DEFAULT_CONFIG, OUTPUT_FORMATS, ExperimentConfig
from rcslab.core.errors import RcsLabError
from rcslab.core.models import Ensemble, Experiment, GateSet, LayoutKind, NoiseKind, Verdict
from rcslab.core.store import ReportStore

logger = logging.getLogger(__name__)

# Derive CLI choices from enums so they stay in sync
_LAYOUT_CHOICES = [k.value for k in LayoutKind]
_NOISE_CHOICES = [k.value for k in NoiseKind]
_GATE_SET_CHOICES = [g.value for g in GateSet]
_ENSEMBLE_CHOICES = [e.value for e in Ensemble]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HARD_FAIL = 2


def _add_scan_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every scan; each mirrors a config key."""
    parser.add_argument("--config", type=Path, help="YAML experiment configuration")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--workers", type=int, help="Worker count (default: $RCSLAB_WORKERS)")
    parser.add_argument("--out-dir", dest="out_dir", help="Output directory")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, help="Report format")
    parser.add_argument("--samples", type=int, help="Circuits per cell")
    parser.add_argument("--block-size", dest="block_size", type=int, help="Samples per task")
    parser.add_argument("--n", type=int, nargs="+", help="Qubit counts")
    parser.add_argument("--d", type=int, nargs="+", help="Depths")
    parser.add_argument("--layout", nargs="+", choices=_LAYOUT_CHOICES, help="Layouts")
    parser.add_argument("--noise", choices=_NOISE_CHOICES, help="Noise model")
    parser.add_argument(
        "--channel",
        dest="channels",
        type=float,
        nargs=3,
        action="append",
        metavar=("QX", "QY", "QZ"),
        help="Pauli channel (repeatable)",
    )
    parser.add_argument("--p", type=float, nargs="+", help="Heralded dephasing rates")
    parser.add_argument("--q", type=float, nargs="+", help="Dephasing strengths")
    parser.add_argument("--alpha", type=float, nargs="+", help="Anticoncentration levels")
    parser.add_argument(
        "--gate-sets", dest="gate_sets", nargs="+", choices=_GATE_SET_CHOICES, help="Gate sets"
    )
    parser.add_argument("--ensemble", choices=_ENSEMBLE_CHOICES, help="Circuit or global Haar")
    parser.add_argument("--executor", choices=["thread", "process"], help="Worker kind")
    parser.add_argument("--dense-cap", dest="dense_cap", type=int, help="Dense qubit cap")
    parser.add_argument("--statmech-cap", dest="statmech_cap", type=int, help="Statmech qubit cap")
    parser.add_argument(
        "--clifford-exact-cap", dest="clifford_exact_cap", type=int, help="Exact Clifford work cap"
    )
    for flag, key, text in (
        ("--leading-layer", "leading_layer", "Single-qubit Haar layer before the circuit"),
        ("--readout-layer", "readout_layer", "Single-qubit Haar layer before readout"),
        ("--compare-noiseless", "compare_noiseless", "Also evaluate the noiseless circuit"),
        ("--allow-large-dense", "allow_large_dense", "Permit dense caps above 10 qubits"),
        ("--clifford-mc", "clifford_mc", "Monte Carlo fallback for large Clifford cells"),
        ("--timings", "timings", "Persist wall-clock times"),
    ):
        parser.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, help=text)


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the rcslab CLI."""
    parser = argparse.ArgumentParser(
        prog="rcslab",
        description="Simulation lab for noisy random quantum circuits",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__import__('rcslab').__version__}",
    )
    parser.add_argument(
        "--json",
        action="store_true",
        help="Output a JSON summary",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    helps = {
        Experiment.TVD_SCAN: "Mean TVD to uniform against the TVD bounds",
        Experiment.ANTICONC_SCAN: "Anticoncentration and collision statistics",
        Experiment.MOMENTS: "Moments of log marginal probabilities",
        Experiment.STATMECH_CHECK: "Statmech averages against dense simulation",
        Experiment.TYPICALITY: "Empirical TVD tail against the typicality bound",
        Experiment.BOUNDS_TABLE: "Evaluate every closed-form bound over a grid",
    }
    for experiment, text in helps.items():
        _add_scan_arguments(subparsers.add_parser(experiment.value, help=text))

    cliffords = subparsers.add_parser(
        "enumerate-cliffords", help="Print the two-qubit Clifford group table"
    )
    cliffords.add_argument("--output", type=Path, help="Write the table to a file")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    if args.command is None:
        parser.print_help()
        return EXIT_ERROR
    if args.command == "enumerate-cliffords":
        return cmd_enumerate_cliffords(args.output, args.json)
    return cmd_scan(Experiment(args.command), args)


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Flag values that were given, keyed like the config file."""
    return {key: getattr(args, key, None) for key in DEFAULT_CONFIG if key != "experiment"}


def build_config(experiment: Experiment, args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then flags."""
    if args.config is not None:
        config = ExperimentConfig.load(args.config)
    else:
        config = ExperimentConfig.from_mapping({})
    return config.with_overrides(experiment=experiment.value, **_overrides(args))


def cmd_scan(experiment: Experiment, args: argparse.Namespace) -> int:
    """Run one scan and write its report."""
    from rcslab.orchestration.experiments import has_hard_failure, run_experiment

    try:
        config = build_config(experiment, args)
        records = run_experiment(config)
        store = ReportStore(Path(config.out_dir), include_timing=config.timings)
        paths = store.write(experiment.value, records, config.format)
    except (RcsLabError, OSError) as e:
        if args.json:
            print(json.dumps({"success": False, "error": str(e)}, indent=2))
        else:
            print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR

    counts: dict[str, int] = {}
    for record in records:
        counts[record.verdict.value] = counts.get(record.verdict.value, 0) + 1
    hard = has_hard_failure(records)
    if args.json:
        result = {
            "success": not hard,
            "experiment": experiment.value,
            "records": len(records),
            "verdicts": counts,
            "files": [str(p) for p in paths],
        }
        print(json.dumps(result, indent=2))
    else:
        print(f"{experiment.value}: {len(records)} record(s)")
        for verdict in Verdict:
            if verdict.value in counts:
                print(f"  {verdict.value}: {counts[verdict.value]}")
        for path in paths:
            print(f"  wrote {path}")
    return EXIT_HARD_FAIL if hard else EXIT_OK


def cmd_enumerate_cliffords(output: Path | None = None, json_output: bool = False) -> int:
    """Print or save the group table and the +Z1-fixing census."""
    from rcslab.engines.clifford import (
        CLIFFORD_GROUP_ORDER,
        clifford_table,
        fraction_fixing_z1,
        group_table_text,
        z1_fixing_ids,
    )

    try:
        order = len(clifford_table().elements)
        fixing = len(z1_fixing_ids())
        fraction = fraction_fixing_z1()
        text = group_table_text()
        if output is not None:
            output.parent.mkdir(parents=True, exist_ok=True)
            output.write_text(text)
    except (RcsLabError, RuntimeError, OSError) as e:
        if json_output:
            print(json.dumps({"success": False, "error": str(e)}, indent=2))
        else:
            print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR

    summary = {
        "success": order == CLIFFORD_GROUP_ORDER,
        "order": order,
        "z1_fixing": fixing,
        "fraction": str(fraction),
    }
    if json_output:
        print(json.dumps(summary, indent=2))
    else:
        if output is None:
            print(text, end="")
        print(f"# order {order}, fixing +Z1: {fixing} ({fraction})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
