"""Profiling: run an instrumented program over an input corpus into a Dataset."""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .instrument import FeatureSchema, feature_vector
from .lang.interp import CostConfig, InputRecord, MiniImpRuntimeError, interpret

log = logging.getLogger(__name__)


@dataclass
class ProfileConfig:
    noise_sigma: float = 0.0
    rng_seed: int = 0
    parallelism: int = 1
    weights: CostConfig = field(default_factory=CostConfig)

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class Dataset:
    y: np.ndarray
    X: np.ndarray
    feature_ids: list
    provenance: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    site_hits: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def m(self) -> int:
        return len(self.feature_ids)

    def column(self, feature_id: str) -> np.ndarray:
        return self.X[:, self.feature_ids.index(feature_id)]

    def subset(self, rows) -> "Dataset":
        rows = list(rows)
        return Dataset(self.y[rows], self.X[rows], list(self.feature_ids),
                       [self.provenance[i] for i in rows] if self.provenance else [])

    def drop_columns(self, feature_ids) -> "Dataset":
        drop = set(feature_ids)
        keep = [j for j, f in enumerate(self.feature_ids) if f not in drop]
        return Dataset(self.y.copy(), self.X[:, keep], [self.feature_ids[j] for j in keep],
                       list(self.provenance))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cost"] + [f"f_{fid}" for fid in self.feature_ids])
        for yi, row in zip(self.y, self.X):
            w.writerow([_fmt(yi)] + [_fmt(v) for v in row])
        return buf.getvalue()

    def save(self, path) -> None:
        path = Path(path)
        path.write_text(self.to_csv())
        path.with_suffix(".provenance.json").write_text(
            json.dumps({"rows": self.provenance, "failures": self.failures}, indent=2))

    @classmethod
    def load(cls, path) -> "Dataset":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0] != "cost":
            raise ValueError(f"{path}: expected a header starting with 'cost'")
        header = rows[0]
        ids = [h[2:] if h.startswith("f_") else h for h in header[1:]]
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
        prov_path = path.with_suffix(".provenance.json")
        prov = json.loads(prov_path.read_text())["rows"] if prov_path.exists() else []
        return cls(data[:, 0].copy(), data[:, 1:].copy(), ids, prov)


def _fmt(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def _run_one(args):
    program, schema, record, weights = args
    try:
        r = interpret(program, record, weights)
    except MiniImpRuntimeError as exc:
        return None, str(exc)
    fv = feature_vector(schema, r)
    return (r.cost, r.trapped, [fv[fid] for fid in schema.ids], r.probe_hits), None


def row_noise(seed: int, row: int, sigma: float) -> float:
    if sigma == 0:
        return 0.0
    return float(np.random.default_rng([seed, row]).normal(0.0, sigma))


def profile_batch(instrumented, schema: FeatureSchema, inputs: list,
                  config: ProfileConfig = None) -> Dataset:
    """Run every input, returning one Dataset row per successful run.

    Rows keep input order whatever the parallelism.  Runs that hit a runtime
    fault are excluded and listed in ``Dataset.failures``; trapped runs (an
    unrescued ``fail``) are kept and flagged in the provenance.
    """
    config = config or ProfileConfig()
    if not inputs:
        raise ValueError("profile_batch needs at least one input")
    jobs = [(instrumented, schema, rec, config.weights) for rec in inputs]
    if config.parallelism > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * config.parallelism))))
    else:
        results = [_run_one(j) for j in jobs]

    ys, xs, prov, failures = [], [], [], []
    hits: dict = {}
    for i, (rec, (res, err)) in enumerate(zip(inputs, results)):
        name = rec.name or f"input{i}"
        if res is None:
            failures.append({"row": i, "input": name, "error": err})
            log.warning("run on %s failed: %s", name, err)
            continue
        cost, trapped, values, probe_hits = res
        ys.append(cost * (1.0 + row_noise(config.rng_seed, i, config.noise_sigma)))
        xs.append(values)
        prov.append({"row": i, "input": name, "trapped": trapped, "cost": cost})
        for k, v in probe_hits.items():
            hits[k] = hits.get(k, 0) + v
    if not ys:
        raise RuntimeError(f"all {len(inputs)} profiling runs failed; first error: {failures[0]['error']}")
    X = np.array(xs, dtype=float).reshape(len(xs), len(schema.ids))
    return Dataset(np.array(ys, dtype=float), X, schema.ids, prov, failures, hits)
