"""Command-line interface.

Subcommands: distance, align, resample, synth, train, predict, eval.
Exit codes: 0 success, 2 input/parse problem, 3 shape/dimension mismatch,
4 protocol/labeling problem, 5 numerical failure.

Numerical flags layer over a JSON config file (flags > config > defaults);
the GRAMTRAJ_CONFIG environment variable names a default config path for
`eval`. With --json, each subcommand prints a single machine-readable JSON
object on stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from gramtraj import __version__
from gramtraj.bundle import load_bundle, predict_bundle, save_bundle, train_bundle
from gramtraj.data.schemas import load_part_schema
from gramtraj.data.sequences import load_dataset, load_sequence, save_sequence
from gramtraj.data.synth import MOTION_CLASSES, synth_trajectory
from gramtraj.errors import (
    ConfigError,
    DegenerateConfig,
    DimensionMismatch,
    GramtrajError,
    MissingPart,
    NaNError,
    NotSPD,
    ParseError,
    PartTooSmall,
    ProtocolInfeasible,
    ShapeError,
    SingleClass,
    UnreachableLength,
)
from gramtraj.evaluation import run_config_from_dict, run_protocol
from gramtraj.geometry.cone import ClosenessParams, gram_sqrt_factor
from gramtraj.report import write_report
from gramtraj.trajectory import (
    ResampleParams,
    adaptive_resample,
    build_trajectory,
    dtw_align,
    dtw_cost_grid,
    resample_to_length,
)

CONFIG_ENV = "GRAMTRAJ_CONFIG"

_EXIT_INPUT = 2
_EXIT_SHAPE = 3
_EXIT_PROTOCOL = 4
_EXIT_NUMERIC = 5

_ERROR_EXIT_CODES = [
    ((ParseError, NaNError, ConfigError, FileNotFoundError, IsADirectoryError), _EXIT_INPUT),
    ((ShapeError, DimensionMismatch, PartTooSmall, MissingPart), _EXIT_SHAPE),
    ((ProtocolInfeasible, SingleClass), _EXIT_PROTOCOL),
    ((NotSPD, DegenerateConfig, UnreachableLength), _EXIT_NUMERIC),
]


def _exit_code(exc: Exception) -> int:
    for types, code in _ERROR_EXIT_CODES:
        if isinstance(exc, types):
            return code
    return _EXIT_INPUT if isinstance(exc, GramtrajError) else 1


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _load_traj(path, args):
    seq = load_sequence(path, fmt=args.format, dim=args.dim)
    try:
        return seq, build_trajectory(seq.frames, label=seq.label, subject=seq.subject)
    except (DegenerateConfig, DimensionMismatch) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _closeness_params(args) -> ClosenessParams:
    return ClosenessParams(spd_weight=args.spd_weight)


def _check_same_shape(args, ta, tb) -> None:
    if (ta.n, ta.dim) != (tb.n, tb.dim):
        raise DimensionMismatch(
            f"{args.seq_a} has {ta.n} x {ta.dim} landmarks but "
            f"{args.seq_b} has {tb.n} x {tb.dim}"
        )


def cmd_distance(args) -> int:
    _, ta = _load_traj(args.seq_a, args)
    _, tb = _load_traj(args.seq_b, args)
    _check_same_shape(args, ta, tb)
    params = _closeness_params(args)
    if args.dump_costs:
        grid = dtw_cost_grid(ta, tb, params)
        np.savetxt(args.dump_costs, grid, delimiter=",", fmt="%.17g")
    path = dtw_align(ta, tb, params)
    value = path.normalized_cost
    _emit(
        args,
        {"dtw_distance": value, "path_length": len(path), "spd_weight": args.spd_weight},
        f"{value:.12e}",
    )
    return 0


def cmd_align(args) -> int:
    _, ta = _load_traj(args.seq_a, args)
    _, tb = _load_traj(args.seq_b, args)
    _check_same_shape(args, ta, tb)
    path = dtw_align(ta, tb, _closeness_params(args))
    payload = {
        "pairs": [list(p) for p in path.pairs],
        "cost": path.cost,
        "normalized_cost": path.normalized_cost,
        "spd_weight": args.spd_weight,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    _emit(
        args,
        payload,
        f"path length {len(path)}, cost {path.cost:.12e}, normalized {path.normalized_cost:.12e}",
    )
    return 0


def cmd_resample(args) -> int:
    seq, traj = _load_traj(args.sequence, args)
    if args.target_len is not None:
        out = resample_to_length(traj, args.target_len)
    else:
        if args.insert_threshold is None and args.drop_threshold is None:
            raise ConfigError("resample needs --target-len or thresholds")
        out = adaptive_resample(
            traj,
            ResampleParams(
                drop_threshold=args.drop_threshold or 0.0,
                insert_threshold=args.insert_threshold or math.inf,
            ),
        )
    # re-sampled points live on the cone; write them back as configurations
    frames = tuple(gram_sqrt_factor(p) for p in out.points)
    save_sequence(seq.with_frames(frames), args.out)
    _emit(
        args,
        {"input_length": len(traj), "output_length": len(out), "out": str(args.out)},
        f"{len(traj)} -> {len(out)} samples written to {args.out}",
    )
    return 0


def cmd_synth(args) -> int:
    seq = synth_trajectory(
        args.motion_class,
        args.length,
        args.noise,
        args.seed,
        n=args.n,
        dim=args.dim,
        rate_warp=args.rate_warp,
        subject=args.subject,
    )
    save_sequence(seq, args.out)
    _emit(
        args,
        {"class": args.motion_class, "length": len(seq), "out": str(args.out)},
        f"wrote {len(seq)}-frame {args.motion_class!r} sequence to {args.out}",
    )
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(args.dataset_dir, fmt=args.format)
    schema = load_part_schema(args.parts) if args.parts else None
    bundle = train_bundle(
        dataset,
        spd_weights=args.spd_weight,
        schema=schema,
        svm_c=args.svm_c,
        seed=args.seed,
        threads=args.threads,
    )
    save_bundle(bundle, args.out)
    _emit(
        args,
        {"samples": len(dataset), "parts": list(bundle.parts), "out": str(args.out)},
        f"trained on {len(dataset)} sequences ({', '.join(bundle.parts)}) -> {args.out}",
    )
    return 0


def cmd_predict(args) -> int:
    bundle = load_bundle(args.model)
    seq = load_sequence(args.sequence, fmt=args.format, dim=args.dim)
    cls, probs = predict_bundle(bundle, seq, threads=args.threads)
    ordered = dict(sorted(probs.items()))
    _emit(
        args,
        {"predicted": cls, "probabilities": ordered},
        cls + "".join(f"\n  {name}: {p:.6f}" for name, p in ordered.items()),
    )
    return 0


def _eval_config(args) -> dict:
    config_path = args.config or os.environ.get(CONFIG_ENV)
    base: dict = {}
    if config_path:
        try:
            base = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ParseError(f"{config_path}: no such config file") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{config_path}: line {exc.lineno}: {exc.msg}") from exc
    if args.protocol:
        if ":" in args.protocol:
            kind, _, folds = args.protocol.partition(":")
            base["protocol"] = {"kind": kind, "folds": int(folds)}
        else:
            base["protocol"] = args.protocol
    if args.classifier:
        base["classifier"] = args.classifier
    if args.svm_c is not None:
        base["svm_c"] = args.svm_c
    if args.knn_k is not None:
        base["knn_k"] = args.knn_k
    if args.spd_weight is not None:
        base["spd_weight"] = None if args.spd_weight == "grid" else float(args.spd_weight)
    if args.parts:
        base["parts_schema"] = args.parts
    if args.resample:
        mode = args.resample
        if ":" in mode:
            mode, _, target = mode.partition(":")
            base["resample"] = {"mode": mode, "target_length": int(target)}
        else:
            base["resample"] = mode
    if args.seed is not None:
        base["seed"] = args.seed
    if args.threads is not None:
        base["threads"] = args.threads
    return base


def cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset_dir, fmt=args.format)
    config = run_config_from_dict(_eval_config(args))
    report = run_protocol(dataset, config)
    written = write_report(report, args.out, figures=not args.no_figures)
    _emit(
        args,
        {
            "mean_accuracy": report.mean_accuracy,
            "std_accuracy": report.std_accuracy,
            "folds": len(report.per_fold_accuracy),
            "artifacts": {k: str(v) for k, v in written.items()},
        },
        f"accuracy {100.0 * report.mean_accuracy:.2f}% +/- {100.0 * report.std_accuracy:.2f}% "
        f"over {len(report.per_fold_accuracy)} folds; report in {args.out}",
    )
    return 0


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", default="json", choices=["json", "csv-dir", "csv-rows"],
                   help="sequence file format (default json)")
    p.add_argument("--dim", type=int, default=3, help="ambient dimension for csv-rows input")
    p.add_argument("--json", action="store_true", help="print machine-readable JSON on stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramtraj",
        description="Landmark-sequence comparison and classification on the fixed-rank PSD cone.",
    )
    parser.add_argument("--version", action="version", version=f"gramtraj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="rate-invariant DTW distance between two sequences")
    p.add_argument("seq_a")
    p.add_argument("seq_b")
    p.add_argument("--k", dest="spd_weight", type=float, default=1.0,
                   help="weight of the covariance term (default 1.0)")
    p.add_argument("--dump-costs", metavar="CSV",
                   help="also write the per-frame-pair closeness grid as CSV")
    _add_io_flags(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("align", help="optimal warping path between two sequences")
    p.add_argument("seq_a")
    p.add_argument("seq_b")
    p.add_argument("--k", dest="spd_weight", type=float, default=1.0)
    p.add_argument("--out", help="write the path as JSON to this file")
    _add_io_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("resample", help="adaptively re-sample a sequence")
    p.add_argument("sequence")
    p.add_argument("--out", required=True)
    p.add_argument("--target-len", type=int, help="re-sample to this exact length")
    p.add_argument("--drop-threshold", type=float, help="remove samples closer than this")
    p.add_argument("--insert-threshold", type=float, help="subdivide gaps larger than this")
    _add_io_flags(p)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("synth", help="generate a synthetic labeled sequence")
    p.add_argument("motion_class", choices=list(MOTION_CLASSES))
    p.add_argument("--out", required=True)
    p.add_argument("--length", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=12, help="landmarks per frame")
    p.add_argument("--dim", type=int, default=3, choices=[2, 3])
    p.add_argument("--rate-warp", type=float, default=0.0)
    p.add_argument("--subject", default="")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a proximity SVM bundle on a dataset directory")
    p.add_argument("dataset_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--k", dest="spd_weight", type=float, default=1.0)
    p.add_argument("--c", dest="svm_c", type=float, default=1.0)
    p.add_argument("--parts", help="part schema (builtin name or JSON path) for fusion training")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    _add_io_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify one sequence with a trained bundle")
    p.add_argument("model")
    p.add_argument("sequence")
    p.add_argument("--threads", type=int)
    _add_io_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="run a cross-validation protocol and write a report")
    p.add_argument("dataset_dir")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--config", help=f"JSON config (default: ${CONFIG_ENV})")
    p.add_argument("--protocol", help="loocv | loso | kfold:N | half_half")
    p.add_argument("--classifier", choices=["ppfsvm", "knn"])
    p.add_argument("--k", dest="spd_weight",
                   help="covariance weight, or 'grid' for inner-CV selection")
    p.add_argument("--c", dest="svm_c", type=float)
    p.add_argument("--knn-k", type=int)
    p.add_argument("--parts", help="part schema for four-model late fusion")
    p.add_argument("--resample", help="none | adaptive | median | length:N")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    _add_io_flags(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GramtrajError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
