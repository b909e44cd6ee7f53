"""Offline pipeline (instrument, profile, fit, slice) with the cost feedback loop,
plus the online predictor built from its output."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .instrument import FeatureSchema, InstrumentConfig, instrument
from .lang import ast as A
from .lang import format_program, parse
from .lang.interp import InputRecord, MiniImpRuntimeError, interpret
from .model.sparse import (DEFAULT_DEGREE, DEFAULT_LAMBDA, SparseModel, select_and_fit,
                           split_rows)
from .profile import ProfileConfig, profile_batch
from .slicer import SliceError, SliceUnsound, baseline_runs, prepare, slice_cost, slice_program

log = logging.getLogger(__name__)

MIN_INPUTS = 10


class PipelineError(RuntimeError):
    def __init__(self, message: str, rejection_log: list = None):
        super().__init__(message)
        self.rejection_log = rejection_log or []


class EvaluatorError(RuntimeError):
    def __init__(self, feature_id: str, message: str):
        super().__init__(f"evaluator for {feature_id} failed: {message}")
        self.feature_id = feature_id


@dataclass
class ModelConfig:
    degree: int = DEFAULT_DEGREE
    lam: float = DEFAULT_LAMBDA
    train_fraction: float = 0.1
    seed: int = 0


@dataclass
class PipelineConfig:
    instrument: InstrumentConfig = field(default_factory=InstrumentConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    cost_threshold: float = 0.10
    max_feedback_iterations: Optional[int] = None  # None: number of features

    def __post_init__(self):
        if not 0 < self.cost_threshold < 1:
            raise ValueError("cost threshold must lie in (0, 1)")


@dataclass
class Assessment:
    feature_id: str
    accepted: bool
    reason: str  # "ok" | "cost" | "unsound" | "emit-error"
    mean_ratio: float = float("nan")
    program: Optional[A.Program] = None

    def to_dict(self) -> dict:
        return {"feature": self.feature_id, "accepted": self.accepted, "reason": self.reason,
                "meanCostRatio": self.mean_ratio}


@dataclass
class PredictorBundle:
    model: SparseModel
    evaluators: dict  # feature id -> Program
    rejection_log: list
    schema: FeatureSchema
    evaluator_costs: dict = field(default_factory=dict)  # feature id -> mean ratio

    def check_consistent(self):
        if set(self.evaluators) != set(self.model.selected_features):
            raise AssertionError("evaluators do not match the model's selected features")

    def save(self, directory) -> Path:
        d = Path(directory)
        (d / "evaluators").mkdir(parents=True, exist_ok=True)
        (d / "model.json").write_text(self.model.to_json())
        (d / "schema.json").write_text(self.schema.to_json())
        (d / "rejection_log.json").write_text(json.dumps(
            {"iterations": self.rejection_log, "evaluatorCosts": self.evaluator_costs}, indent=2))
        for fid, prog in self.evaluators.items():
            (d / "evaluators" / f"{fid}.mimp").write_text(format_program(prog))
        return d

    @classmethod
    def load(cls, directory) -> "PredictorBundle":
        d = Path(directory)
        model = SparseModel.from_json((d / "model.json").read_text())
        schema = FeatureSchema.from_json((d / "schema.json").read_text())
        doc = json.loads((d / "rejection_log.json").read_text())
        evaluators = {fid: parse((d / "evaluators" / f"{fid}.mimp").read_text())
                      for fid in model.selected_features}
        return cls(model, evaluators, doc["iterations"], schema, doc.get("evaluatorCosts", {}))


class _Assessor:
    """Slices and prices evaluators on the training inputs, caching by feature."""

    def __init__(self, instrumented, schema, train_inputs, tau):
        self.ip = instrumented
        self.schema = schema
        self.inputs = train_inputs
        self.tau = tau
        self.sdg = prepare(instrumented)
        self.baseline = baseline_runs(instrumented, train_inputs)
        self.cache: dict = {}

    def __call__(self, fid: str) -> Assessment:
        if fid in self.cache:
            return self.cache[fid]
        var = self.schema.get(fid).global_name
        try:
            prog = slice_program(self.ip, var, self.sdg)
            report = slice_cost(prog, self.ip, self.inputs, var, self.baseline)
        except SliceError as exc:
            log.error("evaluator for %s could not be emitted: %s", fid, exc)
            a = Assessment(fid, False, "emit-error")
        except SliceUnsound as exc:
            log.error("unsound evaluator for %s: %s", fid, exc)
            a = Assessment(fid, False, "unsound")
        else:
            ok = report.mean <= self.tau
            a = Assessment(fid, ok, "ok" if ok else "cost", report.mean, prog)
        self.cache[fid] = a
        return a


def _substitute(model: SparseModel, old: str, new: str, train) -> None:
    """Swap a selected feature for a column that is identical after scaling."""
    params = model.normalization
    j = params.feature_ids.index(old)
    col = train.column(new)
    params.feature_ids[j] = new
    params.mins[j] = float(np.min(col))
    params.maxs[j] = float(np.max(col))
    params.dropped_duplicate = {d: (new if r == old else r)
                                for d, r in params.dropped_duplicate.items() if d != new}
    params.dropped_duplicate[old] = new
    model.selected_features = [new if f == old else f for f in model.selected_features]


def run_pipeline(program: A.Program, inputs: list, config: PipelineConfig = None) -> PredictorBundle:
    config = config or PipelineConfig()
    if len(inputs) < MIN_INPUTS:
        raise ValueError(f"need at least {MIN_INPUTS} inputs, got {len(inputs)}")
    mc = config.model
    ip, schema = instrument(program, config.instrument)
    data = profile_batch(ip, schema, inputs, config.profile)
    train_rows, _ = split_rows(data.n, mc.train_fraction, mc.seed)
    train_inputs = [inputs[data.provenance[r]["row"]] for r in train_rows]
    train = data.subset(train_rows)
    assess = _Assessor(ip, schema, train_inputs, config.cost_threshold)

    limit = config.max_feedback_iterations or max(1, data.m)
    excluded: set = set()
    history: list = []
    for it in range(1, limit + 1):
        model, report = select_and_fit(data.drop_columns(excluded), mc.degree, mc.lam,
                                       mc.train_fraction, mc.seed, path_points=0)
        entry = {"iteration": it, "selected": list(model.selected_features), "rejected": [],
                 "accepted": [], "substitutions": {}, "testError": report.test_error,
                 "interceptOnly": model.intercept_only_warning}
        history.append(entry)
        failed = []
        for fid in list(model.selected_features):
            a = assess(fid)
            if a.accepted:
                entry["accepted"].append(a.to_dict())
                continue
            entry["rejected"].append(a.to_dict())
            twins = sorted(d for d, r in model.normalization.dropped_duplicate.items()
                           if r == fid and d not in excluded)
            sub = next((d for d in twins if assess(d).accepted), None)
            if sub is None:
                failed.append(fid)
                excluded |= {fid, *twins}
            else:
                _substitute(model, fid, sub, train)
                entry["substitutions"][fid] = sub
                entry["accepted"].append(assess(sub).to_dict())
        if not failed:
            evaluators = {f: assess(f).program for f in model.selected_features}
            costs = {f: assess(f).mean_ratio for f in model.selected_features}
            if model.intercept_only_warning:
                log.warning("pipeline ended with an intercept-only model")
            bundle = PredictorBundle(model, evaluators, history, schema, costs)
            bundle.check_consistent()
            return bundle
        log.info("iteration %d rejected %s; refitting", it, ", ".join(failed))
    raise PipelineError(f"no acceptable model after {limit} feedback iterations", history)


def online_predict(bundle: PredictorBundle, record: InputRecord):
    """Run the evaluators on ``record`` and apply the model.

    Returns ``(predicted cost, total evaluator cost)``.
    """
    values = {}
    spent = 0
    for fid in bundle.model.selected_features:
        var = bundle.schema.get(fid).global_name
        try:
            r = interpret(bundle.evaluators[fid], record)
        except MiniImpRuntimeError as exc:
            raise EvaluatorError(fid, str(exc)) from exc
        v = r.globals[var]
        values[fid] = int(v) if isinstance(v, bool) else v
        spent += r.cost
    if not bundle.model.selected_features:
        return float(bundle.model.normalization.denormalize_y(bundle.model.intercept)), 0
    return float(bundle.model.predict_many([values])[0]), spent
