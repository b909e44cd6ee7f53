"""LASSO via cyclic coordinate descent with soft-thresholding.

Minimizes ``(1/2n) * ||y - b0 - X beta||^2 + lam * ||beta||_1`` with an
unpenalized intercept ``b0``.
"""
from __future__ import annotations

import numpy as np

TOL = 1e-8
MAX_SWEEPS = 100_000


def _validate(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in X or y")
    return X, y


def lambda_max(X, y) -> float:
    """Smallest penalty at which every penalized coefficient is zero.

    Columns and response are centered first, which is what an unpenalized
    intercept implies.
    """
    X, y = _validate(X, y)
    n = X.shape[0]
    if n == 0:
        raise ValueError("lambda_max needs at least one sample")
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    if X.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(Xc.T @ yc)) / n)


def soft_threshold(z: float, gamma: float) -> float:
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def objective(X, y, b0, beta, lam) -> float:
    r = y - b0 - X @ beta
    return float(r @ r / (2 * len(y)) + lam * np.sum(np.abs(beta)))


def lasso_fit(X, y, lam: float, tol: float = TOL, max_sweeps: int = MAX_SWEEPS,
              trace: list = None):
    """Return ``(intercept, beta, sweeps)``.

    Full sweeps alternate with sweeps restricted to the current nonzero set;
    convergence is declared when a full sweep moves no coefficient by more
    than ``tol``.  If ``trace`` is a list, the objective after every sweep is
    appended to it.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    X, y = _validate(X, y)
    n, p = X.shape
    xm = X.mean(axis=0) if n else np.zeros(p)
    ym = float(y.mean()) if n else 0.0
    beta = np.zeros(p)
    if p == 0 or n == 0:
        return ym, beta, 0
    Xc = X - xm
    yc = y - ym
    gram = (Xc.T @ Xc) / n
    corr = (Xc.T @ yc) / n
    diag = np.diag(gram).copy()
    usable = [j for j in range(p) if diag[j] > 1e-300]

    def record():
        if trace is not None:
            trace.append(objective(X, y, ym - float(xm @ beta), beta, lam))

    sweeps = 0
    while sweeps < max_sweeps:
        # full sweep; q tracks gram @ beta
        q = gram @ beta
        change = 0.0
        for j in usable:
            old = beta[j]
            new = soft_threshold(corr[j] - q[j] + diag[j] * old, lam) / diag[j]
            if new != old:
                beta[j] = new
                q += (new - old) * gram[:, j]
                change = max(change, abs(new - old))
        sweeps += 1
        record()
        if change <= tol:
            break
        # sweeps over the nonzero set only, on plain Python lists
        active = [j for j in usable if beta[j] != 0.0]
        G = gram[np.ix_(active, active)].tolist()
        qa = [float(v) for v in (gram[active] @ beta)]
        ca = [float(corr[j]) for j in active]
        da = [float(diag[j]) for j in active]
        ba = [float(beta[j]) for j in active]
        k = len(active)
        while sweeps < max_sweeps:
            change = 0.0
            for i in range(k):
                old = ba[i]
                new = soft_threshold(ca[i] - qa[i] + da[i] * old, lam) / da[i]
                if new != old:
                    delta = new - old
                    ba[i] = new
                    row = G[i]
                    for t in range(k):
                        qa[t] += delta * row[t]
                    if abs(delta) > change:
                        change = abs(delta)
            sweeps += 1
            if trace is not None:
                beta[active] = ba
            record()
            if change <= tol:
                break
        beta[active] = ba
    return ym - float(xm @ beta), beta, sweeps
