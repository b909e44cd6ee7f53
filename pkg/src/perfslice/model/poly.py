"""Multivariate polynomial basis: all monomials of total degree <= d."""
from __future__ import annotations

from itertools import combinations_with_replacement
from math import comb

import numpy as np

MAX_TERMS = 100_000


def poly_expand(feature_ids, d: int, cap: int = MAX_TERMS) -> list:
    """Exponent tuples for every monomial of total degree <= ``d``.

    Order is graded lexicographic: degree 0 first, and within a degree the
    monomials containing earlier features come first, so for two features and
    ``d=2`` the result reads 1, x1, x2, x1^2, x1*x2, x2^2.
    """
    k = len(feature_ids)
    if d < 1:
        raise ValueError("degree must be >= 1")
    if k == 0:
        raise ValueError("need at least one feature to expand")
    count = comb(k + d, d)
    if count > cap:
        raise ValueError(f"expansion of {k} features to degree {d} gives {count} terms "
                         f"(cap {cap}); reduce the number of features or the degree")
    terms = []
    for deg in range(d + 1):
        for combo in combinations_with_replacement(range(k), deg):
            exps = [0] * k
            for j in combo:
                exps[j] += 1
            terms.append(tuple(exps))
    return terms


def term_columns(X: np.ndarray, terms) -> np.ndarray:
    """Evaluate each monomial on the rows of ``X`` (columns = features)."""
    X = np.asarray(X, dtype=float)
    out = np.ones((X.shape[0], len(terms)))
    for t, exps in enumerate(terms):
        for j, e in enumerate(exps):
            if e:
                out[:, t] *= X[:, j] ** e
    return out


def format_term(exps, names) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"
