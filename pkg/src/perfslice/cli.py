"""Command-line front end.  Each subcommand only wires files to library calls.

Exit codes: 0 on success, 1 for user errors (bad flags, missing or malformed
files), 2 when an internal invariant breaks.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .instrument import FeatureSchema, InstrumentConfig, instrument
from .lang import InputRecord, MiniImpCheckError, MiniImpSyntaxError, format_program, parse
from .lang.interp import MiniImpRuntimeError
from .model import NoUsableFeatures, select_and_fit
from .model.sparse import DEFAULT_DEGREE, DEFAULT_LAMBDA
from .pipeline import (EvaluatorError, ModelConfig, PipelineConfig, PipelineError,
                       PredictorBundle, online_predict, run_pipeline)
from .profile import Dataset, ProfileConfig, profile_batch
from .slicer import (SliceError, SliceUnsound, baseline_runs, manifest, prepare, slice_cost,
                     slice_program)
from .slicer.reach import SliceCriterion

log = logging.getLogger("perfslice")

SEED_ENV = "PERFSLICE_SEED"
TRAIN_FRACTIONS = (0.05, 0.1, 0.2, 0.3, 0.4)


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UserError(f"{SEED_ENV} must be an integer, got {raw!r}")


# ------------------------------------------------------------------ helpers

def _read(path) -> str:
    p = Path(path)
    if not p.is_file():
        raise UserError(f"no such file: {p}")
    return p.read_text()


def _program(path):
    return parse(_read(path))


def _schema_for(instr_path, explicit=None) -> FeatureSchema:
    path = Path(explicit) if explicit else Path(instr_path).with_name("schema.json")
    return FeatureSchema.from_json(_read(path))


def _inputs(directory) -> list:
    d = Path(directory)
    if not d.is_dir():
        raise UserError(f"no such input directory: {d}")
    files = sorted(f for f in d.iterdir() if f.is_file() and not f.name.startswith("."))
    if not files:
        raise UserError(f"input directory {d} is empty")
    return [InputRecord.load(f) for f in files]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# --------------------------------------------------------------- commands

def cmd_instrument(args):
    prog = _program(args.program)
    ip, schema = instrument(prog, InstrumentConfig(versions_per_variable=args.k))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.program).name.split(".")[0]
    (out / f"{stem}.instr.mimp").write_text(format_program(ip))
    (out / "schema.json").write_text(schema.to_json())
    print(f"instrumented {args.program}: {len(schema.features)} features -> {out}")


def cmd_profile(args):
    ip = _program(args.program)
    schema = _schema_for(args.program, args.schema)
    seed = args.seed if args.seed is not None else default_seed()
    cfg = ProfileConfig(noise_sigma=args.noise, rng_seed=seed, parallelism=args.jobs)
    data = profile_batch(ip, schema, _inputs(args.inputs), cfg)
    data.save(args.output)
    print(f"profiled {data.n} runs ({len(data.failures)} failed), {data.m} features -> {args.output}")


def cmd_train(args):
    path = Path(args.csv)
    if not path.is_file():
        raise UserError(f"no such file: {path}")
    data = Dataset.load(path)
    seed = args.seed if args.seed is not None else default_seed()
    model, report = select_and_fit(data, args.degree, args.lam, args.train_frac, seed,
                                   lam_fraction=args.lam_fraction)
    out = Path(args.output)
    out.write_text(model.to_json())
    print(model.format())
    print(f"train error {report.train_error:.4f}  test error {report.test_error:.4f}  "
          f"lambda_max {report.lambda_max:.4g}")
    if args.sweep:
        stem = out.with_suffix("")
        _write_csv(f"{stem}.lambda_path.csv", ["lambda", "selectedCount", "testError"],
                   report.lambda_path)
        rows = []
        for frac in TRAIN_FRACTIONS:
            _, rep = select_and_fit(data, args.degree, args.lam, frac, seed, path_points=0,
                                    lam_fraction=args.lam_fraction)
            rows.append((frac, rep.test_error))
        _write_csv(f"{stem}.train_sizes.csv", ["trainFraction", "testError"], rows)
        print(f"sweeps -> {stem}.lambda_path.csv, {stem}.train_sizes.csv")


def cmd_slice(args):
    ip = _program(args.program)
    schema = _schema_for(args.program, args.schema)
    try:
        feature = schema.get(args.feature)
    except KeyError:
        raise UserError(f"unknown feature {args.feature}")
    info = []
    sdg = prepare(ip)
    ev = slice_program(ip, feature.global_name, sdg, info)
    report = None
    if args.inputs:
        inputs = _inputs(args.inputs)
        report = slice_cost(ev, ip, inputs, feature.global_name, baseline_runs(ip, inputs))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{feature.feature_id}.mimp").write_text(format_program(ev))
    (out / f"{feature.feature_id}.manifest.json").write_text(
        manifest(SliceCriterion(feature.global_name, ip.entry), info[0], report))
    line = f"evaluator for {feature.feature_id}: {len(info[0].retained)} statements kept"
    if report is not None:
        line += f", mean cost ratio {report.mean:.4f}"
    print(line + f" -> {out}")


def cmd_pipeline(args):
    prog = _program(args.program)
    seed = args.seed if args.seed is not None else default_seed()
    cfg = PipelineConfig(
        instrument=InstrumentConfig(versions_per_variable=args.k),
        profile=ProfileConfig(noise_sigma=args.noise, rng_seed=seed, parallelism=args.jobs),
        model=ModelConfig(args.degree, args.lam, args.train_frac, seed),
        cost_threshold=args.tau,
        max_feedback_iterations=args.max_iterations,
    )
    bundle = run_pipeline(prog, _inputs(args.inputs), cfg)
    bundle.save(args.output)
    for entry in bundle.rejection_log:
        rejected = ", ".join(f"{r['feature']} ({r['reason']})" for r in entry["rejected"]) or "-"
        print(f"iteration {entry['iteration']}: selected {', '.join(entry['selected']) or '-'}; "
              f"rejected {rejected}")
    print(bundle.model.format())
    print(f"bundle -> {args.output}")


def cmd_predict(args):
    d = Path(args.bundle)
    if not (d / "model.json").is_file():
        raise UserError(f"{d} is not a bundle directory (model.json missing)")
    bundle = PredictorBundle.load(d)
    record = InputRecord.parse(_read(args.input), Path(args.input).name)
    predicted, spent = online_predict(bundle, record)
    print(json.dumps({"input": record.name, "predictedCost": predicted, "evaluatorCost": spent}))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="perfslice", description="Predict program cost from sliced feature evaluators.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("instrument", help="insert feature probes")
    s.add_argument("program")
    s.add_argument("-k", type=int, default=5, help="versions recorded per variable")
    s.add_argument("-o", "--output", default=".")
    s.set_defaults(func=cmd_instrument)

    s = sub.add_parser("profile", help="run an instrumented program over inputs")
    s.add_argument("program")
    s.add_argument("--inputs", required=True)
    s.add_argument("--schema", help="defaults to schema.json next to the program")
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("-o", "--output", default="profile.csv")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("train", help="fit the sparse polynomial model")
    s.add_argument("csv")
    s.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    lam = s.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                     help="penalty in normalized units")
    lam.add_argument("--lambda-fraction", dest="lam_fraction", type=float, help="penalty as a fraction of lambda_max")
    s.add_argument("--train-frac", type=float, default=0.1)
    s.add_argument("--seed", type=int)
    s.add_argument("--sweep", action="store_true", help="also write lambda and training-size CSVs")
    s.add_argument("-o", "--output", default="model.json")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("slice", help="emit the evaluator for one feature")
    s.add_argument("program")
    s.add_argument("--feature", required=True)
    s.add_argument("--schema")
    s.add_argument("--inputs", help="measure cost ratios on these inputs")
    s.add_argument("-o", "--output", default=".")
    s.set_defaults(func=cmd_slice)

    s = sub.add_parser("pipeline", help="instrument, profile, fit and slice with cost feedback")
    s.add_argument("program")
    s.add_argument("--inputs", required=True)
    s.add_argument("--tau", type=float, default=0.10)
    s.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    s.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    s.add_argument("--train-frac", type=float, default=0.1)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int)
    s.add_argument("-k", type=int, default=5)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--max-iterations", type=int)
    s.add_argument("-o", "--output", default="bundle")
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("predict", help="predict the cost of one input with a bundle")
    s.add_argument("bundle")
    s.add_argument("input")
    s.set_defaults(func=cmd_predict)
    return p


USER_ERRORS = (UserError, MiniImpSyntaxError, MiniImpCheckError, MiniImpRuntimeError,
               NoUsableFeatures, PipelineError, EvaluatorError, ValueError, KeyError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (SliceError, SliceUnsound, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is our bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
