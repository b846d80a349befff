"""Command-line entry point.

Subcommands: synth (generate a dataset CSV), train (fit and save a
model), attack (run an experiment grid and emit a report), bound
(reconstruction-error ceiling of a dataset), report (aggregate a report
into per-configuration means, optionally rendering figures).

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import data as data_mod
from . import harness
from .errors import ConfigError, InputError, ParseError, ShapeError, VflinferError
from .linalg import derive_seed
from .metrics import mse_upper_bound
from .models import save_model

VALIDATION_ERRORS = (ConfigError, InputError, ParseError, ShapeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse usage problems are validation errors
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vflinfer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--d", type=int, required=True)
    p_synth.add_argument("--c", type=int, required=True)
    p_synth.add_argument("--class-sep", type=float, default=1.0)
    p_synth.add_argument("--mix-strength", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)

    p_train = sub.add_parser("train", help="train a model from a config file")
    p_train.add_argument("--config", required=True, help="JSON with dataset/model keys")
    p_train.add_argument("--seed", type=int, default=None, help="override config seed")
    p_train.add_argument("--out", required=True, help="model JSON output path")

    p_attack = sub.add_parser("attack", help="run an experiment grid")
    p_attack.add_argument("--config", required=True, help="experiment config JSON")
    p_attack.add_argument("--seed", type=int, default=None, help="override config seed")
    p_attack.add_argument("--out", required=True, help="report output path")
    p_attack.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p_attack.add_argument("--parallel", type=int, default=1)
    p_attack.add_argument(
        "--include-runtime",
        action="store_true",
        help="add wall-time per record (breaks byte-for-byte reproducibility)",
    )

    p_bound = sub.add_parser("bound", help="error ceiling of a normalized dataset")
    p_bound.add_argument("--csv", required=True)
    p_bound.add_argument("--label-column", default="label")
    p_bound.add_argument("--delimiter", default=",")

    p_report = sub.add_parser("report", help="aggregate a report, render figures")
    p_report.add_argument("--report", required=True, help="jsonl/csv report to read")
    p_report.add_argument("--out", required=True, help="aggregated CSV output path")
    p_report.add_argument("--figures", default=None, help="directory for PNG figures")
    return parser


def _cmd_synth(args) -> int:
    ds = data_mod.synth_generate(
        data_mod.SynthConfig(
            n=args.n,
            d=args.d,
            c=args.c,
            class_sep=args.class_sep,
            mix_strength=args.mix_strength,
            seed=args.seed,
        )
    )
    data_mod.save_csv(ds, args.out)
    print(f"wrote {ds.n} rows x {ds.d} features ({ds.num_classes} classes) to {args.out}")
    return 0


_TRAIN_ATTACK_SHIM = {"logreg": "esa", "tree": "pra", "mlp": "grna", "forest": "grna"}


def _cmd_train(args) -> int:
    with open(args.config) as fh:
        obj = json.load(fh)
    # training ignores the attack, but config validation wants a compatible one
    kind = obj.get("model", {}).get("kind")
    obj["attack"] = {"kind": _TRAIN_ATTACK_SHIM.get(kind, "esa")}
    cfg = harness.config_from_dict(obj)
    if args.seed is not None:
        cfg.seed = args.seed
    ds = harness.build_dataset(cfg)
    model = harness._train_model(
        cfg.model, ds, derive_seed(cfg.seed, "model"), cfg.defense
    )
    save_model(model, args.out)
    print(f"trained {cfg.model['kind']} on {ds.n} samples; saved to {args.out}")
    return 0


def _cmd_attack(args) -> int:
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    records = harness.run_experiment(cfg, parallel=args.parallel)
    harness.emit_report(records, args.out, fmt=args.format, include_runtime=args.include_runtime)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_bound(args) -> int:
    ds = data_mod.load_csv(args.csv, label_column=args.label_column, delimiter=args.delimiter)
    normalized, _ = data_mod.minmax_normalize(ds)
    bound = mse_upper_bound(normalized.features)
    print(f"{args.csv}: n={ds.n} d={ds.d} c={ds.num_classes} mse_upper_bound={bound:.4f}")
    return 0


def _cmd_report(args) -> int:
    rows = harness.parse_report(args.report)
    aggregated = harness.aggregate_records(rows)
    fields = list(aggregated[0].keys()) if aggregated else []
    with open(args.out, "w") as fh:
        fh.write(",".join(fields) + "\n")
        for row in aggregated:
            fh.write(
                ",".join(
                    "" if row[f] is None else repr(row[f]) if isinstance(row[f], float) else str(row[f])
                    for f in fields
                )
                + "\n"
            )
    print(f"aggregated {len(rows)} records into {len(aggregated)} rows at {args.out}")
    if args.figures:
        from .figures import render_report_figures

        written = render_report_figures(aggregated, args.figures)
        for path in written:
            print(f"figure: {path}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "attack": _cmd_attack,
    "bound": _cmd_bound,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VflinferError, OSError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
