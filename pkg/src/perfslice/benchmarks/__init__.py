"""Benchmark MiniImp programs bundled with seeded input generators."""
from __future__ import annotations

from importlib import resources

import numpy as np

from ..lang import InputRecord, parse


def _ints(*values):
    return [int(v) for v in values]


def _gridwork(rng):
    return _ints(rng.integers(1, 41), rng.integers(1, 41), rng.integers(0, 100))


def _gridwork2(rng):
    return _ints(rng.integers(1, 41), rng.integers(1, 41), rng.integers(0, 100))


def _readloop(rng):
    k = int(rng.integers(1, 61))
    return [round(float(v), 4) for v in rng.random(k)]


def _feedback(rng):
    return _ints(rng.integers(5, 61), rng.integers(1, 41))


def _recursion(rng):
    return _ints(rng.integers(0, 16))


def _arrays(rng):
    n = int(rng.integers(0, 26))
    return _ints(n, *rng.integers(0, 100, n))


def _rescue(rng):
    n = int(rng.integers(0, 21))
    return _ints(n, *rng.integers(-10, 101, n), rng.integers(0, 2))


def _multisite(rng):
    return _ints(rng.integers(0, 30), rng.integers(0, 30))


def _earlyreturn(rng):
    n = int(rng.integers(0, 20))
    values = rng.integers(0, 12, n)
    return _ints(n, *values, rng.integers(0, 12))


def _shortcircuit(rng):
    n = int(rng.integers(0, 25))
    return _ints(n, *rng.integers(0, 30, n))


def _records(rng):
    groups = int(rng.integers(0, 6))
    out = [groups]
    for _ in range(groups):
        k = int(rng.integers(0, 6))
        out.append(k)
        out.extend(round(float(v), 3) for v in rng.uniform(0, 10, k))
    out.extend(round(float(v), 3) for v in rng.uniform(0, 10, int(rng.integers(0, 4))))
    return out


def _matrix(rng):
    return _ints(rng.integers(0, 7), rng.integers(0, 20))


def _statemachine(rng):
    return _ints(*rng.integers(0, 3, int(rng.integers(0, 40))))


def _one_int(rng):
    return _ints(rng.integers(-5, 30))


def _two_ints(rng):
    return _ints(rng.integers(-5, 30), rng.integers(-5, 30))


GENERATORS = {
    "gridwork": _gridwork,
    "gridwork2": _gridwork2,
    "readloop": _readloop,
    "feedback": _feedback,
    "recursion": _recursion,
    "arrays": _arrays,
    "rescue": _rescue,
    "multisite": _multisite,
    "earlyreturn": _earlyreturn,
    "shortcircuit": _shortcircuit,
    "records": _records,
    "matrix": _matrix,
    "statemachine": _statemachine,
    "tiny_identity": _one_int,
    "tiny_first": _two_ints,
    "tiny_mutual": _one_int,
}

NAMES = list(GENERATORS)


def source(name: str) -> str:
    if name not in GENERATORS:
        raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(NAMES)}")
    return resources.files(__package__).joinpath(f"{name}.mimp").read_text()


def load(name: str):
    return parse(source(name))


def inputs(name: str, count: int, seed: int = 0) -> list:
    """``count`` reproducible inputs; record ``k`` depends only on (seed, k)."""
    gen = GENERATORS[name]
    out = []
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        out.append(InputRecord(gen(rng), f"{name}-{seed}-{k}"))
    return out
