"""Three-step sparse polynomial cost model.

1. linear LASSO on the normalized features keeps the ones with nonzero weight;
2. the survivors are expanded into every monomial of degree <= d;
3. a second LASSO over those monomials picks the final terms.

Model-level penalties are in "model units": they weight the L1 norm against
the plain residual sum of squares on min-max normalized data.  The solver in
:mod:`.lasso` averages the squared residuals instead, so a model-level
``lam`` becomes ``lam / (2 * n_train)`` there (see :func:`solver_lambda`).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..profile import Dataset
from .lasso import lambda_max, lasso_fit
from .poly import format_term, poly_expand, term_columns

log = logging.getLogger(__name__)

DUPLICATE_TOL = 1e-12
DEFAULT_LAMBDA = 0.03
DEFAULT_DEGREE = 3
PATH_POINTS = 20


class NoUsableFeatures(ValueError):
    pass


@dataclass
class NormalizationParams:
    feature_ids: list
    mins: list
    maxs: list
    y_min: float
    y_max: float
    dropped_constant: list = field(default_factory=list)
    dropped_duplicate: dict = field(default_factory=dict)  # duplicate -> representative

    def normalize(self, X: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.mins)
        span = np.asarray(self.maxs) - lo
        return (np.asarray(X, dtype=float) - lo) / span

    def denormalize(self, Xn: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.mins)
        return np.asarray(Xn) * (np.asarray(self.maxs) - lo) + lo

    def normalize_y(self, y):
        span = self.y_max - self.y_min
        y = np.asarray(y, dtype=float)
        return (y - self.y_min) / span if span > 0 else np.zeros_like(y)

    def denormalize_y(self, yn):
        return np.asarray(yn) * (self.y_max - self.y_min) + self.y_min

    def to_dict(self) -> dict:
        return {"featureIds": self.feature_ids, "mins": self.mins, "maxs": self.maxs,
                "yMin": self.y_min, "yMax": self.y_max,
                "droppedConstant": self.dropped_constant,
                "droppedDuplicate": self.dropped_duplicate}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationParams":
        return cls(d["featureIds"], d["mins"], d["maxs"], d["yMin"], d["yMax"],
                   d["droppedConstant"], d["droppedDuplicate"])


def normalize_and_prune(data: Dataset):
    """Drop constant and duplicate columns, min-max scale the rest and y."""
    if data.n < 2:
        raise ValueError("normalization needs at least two samples")
    X = np.asarray(data.X, dtype=float)
    mins = X.min(axis=0) if data.m else np.zeros(0)
    maxs = X.max(axis=0) if data.m else np.zeros(0)
    constant = [data.feature_ids[j] for j in range(data.m) if not maxs[j] > mins[j]]
    keep = [j for j in range(data.m) if maxs[j] > mins[j]]
    if not keep:
        raise NoUsableFeatures("no usable features: every column is constant")
    scaled = (X[:, keep] - mins[keep]) / (maxs[keep] - mins[keep])
    reps: list = []
    duplicates = {}
    for pos, j in enumerate(keep):
        col = scaled[:, pos]
        for rpos in reps:
            if np.max(np.abs(col - scaled[:, rpos])) <= DUPLICATE_TOL:
                duplicates[data.feature_ids[j]] = data.feature_ids[keep[rpos]]
                break
        else:
            reps.append(pos)
    cols = [keep[pos] for pos in reps]
    params = NormalizationParams(
        [data.feature_ids[j] for j in cols],
        [float(mins[j]) for j in cols], [float(maxs[j]) for j in cols],
        float(np.min(data.y)), float(np.max(data.y)), constant, duplicates)
    out = Dataset(params.normalize_y(data.y), scaled[:, reps], list(params.feature_ids),
                  list(data.provenance))
    return out, params


@dataclass
class SparseModel:
    degree: int
    lam: float
    selected_features: list
    terms: list  # [(exponents tuple, coefficient)]
    intercept: float
    normalization: NormalizationParams
    report: dict = field(default_factory=dict)
    intercept_only_warning: bool = False

    def predict_normalized(self, Xsel: np.ndarray) -> np.ndarray:
        out = np.full(Xsel.shape[0], self.intercept, dtype=float)
        if self.terms:
            cols = term_columns(Xsel, [t for t, _ in self.terms])
            out += cols @ np.array([c for _, c in self.terms])
        return out

    def feature_matrix(self, values) -> np.ndarray:
        """Normalized columns of ``selected_features`` from dict rows or a Dataset."""
        params = self.normalization
        idx = [params.feature_ids.index(f) for f in self.selected_features]
        lo = np.array([params.mins[i] for i in idx])
        span = np.array([params.maxs[i] for i in idx]) - lo
        if isinstance(values, Dataset):
            missing = [f for f in self.selected_features if f not in values.feature_ids]
            if missing:
                raise KeyError(f"dataset lacks feature {missing[0]}")
            raw = np.column_stack([values.column(f) for f in self.selected_features]) \
                if self.selected_features else np.zeros((values.n, 0))
        else:
            rows = []
            for row in values:
                for f in self.selected_features:
                    if f not in row:
                        raise KeyError(f"missing feature {f}")
                rows.append([float(row[f]) for f in self.selected_features])
            raw = np.array(rows, dtype=float).reshape(len(rows), len(self.selected_features))
        return (raw - lo) / span

    def predict_many(self, values) -> np.ndarray:
        yn = self.predict_normalized(self.feature_matrix(values))
        return self.normalization.denormalize_y(yn)

    def format(self, names: Optional[dict] = None) -> str:
        names = names or {}
        labels = [names.get(f, f) for f in self.selected_features]
        text = f"f({', '.join(labels)}) = {self.intercept:.4g}"
        for exps, coef in self.terms:
            sign = "-" if coef < 0 else "+"
            text += f" {sign} {abs(coef):.4g}*{format_term(exps, labels)}"
        return text

    def to_json(self) -> str:
        return json.dumps({
            "degree": self.degree,
            "lambda": self.lam,
            "selectedFeatures": self.selected_features,
            "terms": [{"exponents": list(e), "coefficient": c} for e, c in self.terms],
            "intercept": self.intercept,
            "normalization": self.normalization.to_dict(),
            "report": self.report,
            "interceptOnlyWarning": self.intercept_only_warning,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SparseModel":
        d = json.loads(text)
        return cls(d["degree"], d["lambda"], d["selectedFeatures"],
                   [(tuple(t["exponents"]), t["coefficient"]) for t in d["terms"]],
                   d["intercept"], NormalizationParams.from_dict(d["normalization"]),
                   d.get("report", {}), d.get("interceptOnlyWarning", False))


@dataclass
class FitReport:
    lambda_max: float
    lambda_path: list  # [(lam, selected count, validation error)]
    train_error: float
    test_error: float
    iteration_count: int
    n_train: int = 0
    n_test: int = 0

    def summary(self) -> dict:
        return {"lambdaMax": self.lambda_max, "trainError": self.train_error,
                "testError": self.test_error, "iterationCount": self.iteration_count,
                "nTrain": self.n_train, "nTest": self.n_test,
                "lambdaPath": [list(p) for p in self.lambda_path]}


def prediction_error(predicted: float, actual: float) -> float:
    """Relative error ``|predicted - actual| / actual``."""
    if not actual > 0:
        raise ValueError("actual value must be positive")
    return abs(predicted - actual) / actual


def mean_relative_error(predicted, actual) -> float:
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if actual.size == 0:
        return float("nan")
    if np.any(actual <= 0):
        raise ValueError("actual values must be positive")
    return float(np.mean(np.abs(predicted - actual) / actual))


def split_rows(n: int, train_fraction: float, seed: int):
    if not 0 < train_fraction < 1:
        raise ValueError("train fraction must lie in (0, 1)")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = min(n, max(2, int(round(train_fraction * n))))
    return sorted(perm[:n_train].tolist()), sorted(perm[n_train:].tolist())


def solver_lambda(lam: float, n: int) -> float:
    return lam / (2.0 * n)


def model_lambda_max(norm: Dataset) -> float:
    return 2.0 * norm.n * lambda_max(norm.X, norm.y)


def fit_normalized(norm: Dataset, params: NormalizationParams, degree: int, lam: float,
                   lam_step1: Optional[float] = None) -> SparseModel:
    """Steps 1-3 on already normalized training data."""
    lam1 = lam if lam_step1 is None else lam_step1
    _, beta, it1 = lasso_fit(norm.X, norm.y, solver_lambda(lam1, norm.n))
    survivors = [j for j in range(norm.m) if beta[j] != 0.0]
    if not survivors:
        log.warning("step 1 selected no features; falling back to an intercept-only model")
        return SparseModel(degree, lam, [], [], float(np.mean(norm.y)), params,
                           {"iterations": it1}, intercept_only_warning=True)
    selected = [norm.feature_ids[j] for j in survivors]
    terms = poly_expand(selected, degree)[1:]
    cols = term_columns(norm.X[:, survivors], terms)
    b0, coef, it3 = lasso_fit(cols, norm.y, solver_lambda(lam, norm.n))
    kept = [(terms[t], float(coef[t])) for t in range(len(terms)) if coef[t] != 0.0]
    return SparseModel(degree, lam, selected, kept, float(b0), params,
                       {"iterations": it1 + it3})


def select_and_fit(data: Dataset, degree: int = DEFAULT_DEGREE, lam: float = DEFAULT_LAMBDA,
                   train_fraction: float = 0.1, seed: int = 0,
                   lam_step1: Optional[float] = None, path_points: int = PATH_POINTS,
                   lam_fraction: Optional[float] = None):
    """Split, normalize on the training rows, and run the three-step fit.

    ``lam`` is in normalized units; pass ``lam_fraction`` instead to express it
    as a fraction of the step-1 lambda_max.  Returns ``(model, report)``.
    """
    train, test = split_rows(data.n, train_fraction, seed)
    tr = data.subset(train)
    te = data.subset(test)
    norm, params = normalize_and_prune(tr)
    lmax = model_lambda_max(norm)
    if lam_fraction is not None:
        lam = lam_fraction * lmax
        if lam_step1 is not None:
            lam_step1 = lam_fraction * lmax
    model = fit_normalized(norm, params, degree, lam, lam_step1)
    train_err = mean_relative_error(model.predict_many(tr), tr.y)
    test_err = mean_relative_error(model.predict_many(te), te.y) if te.n else float("nan")

    path = []
    if path_points and lmax > 0:
        for lp in np.geomspace(lmax * 1e-3, lmax, path_points):
            m = fit_normalized(norm, params, degree, float(lp))
            err = mean_relative_error(m.predict_many(te), te.y) if te.n else float("nan")
            path.append((float(lp), len(m.selected_features), err))
    report = FitReport(lmax, path, train_err, test_err, model.report.get("iterations", 0),
                       len(train), len(test))
    model.report = report.summary()
    return model, report


def predict(model: SparseModel, features: dict) -> float:
    """Estimate the cost for one feature vector (extrapolation allowed)."""
    return float(model.predict_many([features])[0])
