"""Acceptance suite: one test per numbered criterion.

Each test records a PASS/FAIL line; the lines are printed together in the
terminal summary (see conftest.py).  Run alone with
``pytest tests/test_acceptance.py -v``.
"""
import logging
import time
from math import comb

import numpy as np
import pytest

from perfslice import benchmarks
from perfslice.instrument import instrument
from perfslice.lang import interpret
from perfslice.model import lambda_max, lasso_fit, poly_expand, select_and_fit
from perfslice.pipeline import ModelConfig, PipelineConfig, run_pipeline
from perfslice.profile import ProfileConfig, profile_batch
from perfslice.slicer import baseline_runs, build_sdg, prepare, slice_cost, slice_program
from perfslice.slicer.summary import summary_edges
from oracles import brute_force_summaries, brute_monomials, kkt_violation

RESULTS = {}

N_INPUTS = 300
SIGMA = 0.02
FRACTION = 0.10
DEGREE = 3
LAM = 0.03
TAU = 0.10


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def config(seed=0):
    return PipelineConfig(profile=ProfileConfig(noise_sigma=SIGMA, rng_seed=seed),
                          model=ModelConfig(DEGREE, LAM, FRACTION, seed), cost_threshold=TAU)


@pytest.fixture(scope="module", autouse=True)
def quiet():
    logging.disable(logging.WARNING)
    yield
    logging.disable(logging.NOTSET)


@pytest.fixture(scope="module")
def gridwork_profile():
    prog = benchmarks.load("gridwork")
    ip, schema = instrument(prog)
    data = profile_batch(ip, schema, benchmarks.inputs("gridwork", N_INPUTS, 0),
                         ProfileConfig(noise_sigma=SIGMA, rng_seed=0))
    return data


def test_c01_end_to_end_accuracy():
    prog = benchmarks.load("gridwork")
    start = time.perf_counter()
    bundle = run_pipeline(prog, benchmarks.inputs("gridwork", N_INPUTS, 0), config())
    elapsed = time.perf_counter() - start
    err = bundle.model.report["testError"]
    record(1, err <= 0.07 and elapsed <= 60,
           f"gridwork held-out error {err:.4f} (<= 0.07), runtime {elapsed:.1f}s (<= 60s)")


def test_c02_blackbox_contrast():
    prog = benchmarks.load("gridwork2")
    inputs = benchmarks.inputs("gridwork2", N_INPUTS, 0)
    full = run_pipeline(prog, inputs, config()).model.report["testError"]
    ip, schema = instrument(prog)
    data = profile_batch(ip, schema, inputs, ProfileConfig(noise_sigma=SIGMA, rng_seed=0))
    # the one scalar a blackbox model would see: the first input value
    keep = next(f.feature_id for f in schema.features if f.detail == "w@0")
    single = data.drop_columns([f for f in data.feature_ids if f != keep])
    _, rep = select_and_fit(single, DEGREE, LAM, FRACTION, 0, path_points=0)
    record(2, rep.test_error >= 3 * full,
           f"blackbox error {rep.test_error:.4f} vs full {full:.4f} "
           f"(ratio {rep.test_error / full:.1f}, needs >= 3)")


def test_c03_lambda_insensitivity(gridwork_profile):
    grid = np.geomspace(0.007, 0.07, 8)
    errors = [select_and_fit(gridwork_profile, DEGREE, float(lam), FRACTION, 0,
                             path_points=0)[1].test_error for lam in grid]
    best = min(errors)
    # informational: the same decade read as fractions of lambda_max
    lmax = select_and_fit(gridwork_profile, DEGREE, LAM, FRACTION, 0, path_points=0)[1].lambda_max
    frac_errors = [select_and_fit(gridwork_profile, DEGREE, float(f * lmax), FRACTION, 0,
                                  path_points=0)[1].test_error for f in (0.007, 0.07)]
    spread = max(errors) - best
    record(3, spread <= 0.02,
           f"lambda in [0.007, 0.07] normalized units: errors "
           f"{', '.join(f'{e:.3f}' for e in errors)}; spread {spread:.4f} (<= 0.02); "
           f"fraction-of-lambda_max reading at 0.007/0.07 gives "
           f"{frac_errors[0]:.3f}/{frac_errors[1]:.3f}")


def test_c04_training_size(gridwork_profile):
    errors = {f: select_and_fit(gridwork_profile, DEGREE, LAM, f, 0, path_points=0)[1].test_error
              for f in (0.05, 0.1, 0.2, 0.3, 0.4)}
    record(4, all(e <= 0.10 for e in errors.values()),
           "errors " + ", ".join(f"{f}: {e:.4f}" for f, e in errors.items()) + " (each <= 0.10)")


def test_c05_lasso_kkt():
    worst, zero_ok = 0.0, True
    for seed in range(100):
        rng = np.random.default_rng(seed)
        X = rng.normal(0, 1, (100, 20))
        beta = np.zeros(20)
        beta[rng.choice(20, 3, replace=False)] = rng.uniform(1, 3, 3) * rng.choice([-1, 1], 3)
        y = X @ beta + rng.normal(0, 0.01, 100)
        lmax = lambda_max(X, y)
        lam = float(rng.uniform(0.001, 0.5)) * lmax
        b0, b, _ = lasso_fit(X, y, lam)
        worst = max(worst, kkt_violation(X, y, b0, b, lam))
        for over in (lmax, 2 * lmax):
            _, bz, _ = lasso_fit(X, y, over)
            zero_ok &= bool(np.all(bz == 0.0))
    record(5, worst <= 1e-6 and zero_ok,
           f"worst KKT violation {worst:.2e} over 100 instances (<= 1e-6); "
           f"zero vector at lambda >= lambda_max: {zero_ok}")


def test_c06_expansion_count():
    bad = [(k, d) for k in range(1, 7) for d in range(1, 5)
           if not (len(poly_expand(list(range(k)), d)) == comb(k + d, d) == len(brute_monomials(k, d)))]
    record(6, not bad, f"24 (k, d) pairs checked, mismatches {bad}")


def test_c07_slice_soundness():
    checked, mismatches = 0, []
    for name in benchmarks.NAMES:
        ip, schema = instrument(benchmarks.load(name))
        sdg = prepare(ip)
        inputs = benchmarks.inputs(name, 100, 7)
        base = baseline_runs(ip, inputs)
        for feat in schema.features:
            ev = slice_program(ip, feat.global_name, sdg)
            try:
                # raises on the first input whose value differs
                slice_cost(ev, ip, inputs, feat.global_name, base)
            except Exception as exc:  # noqa: BLE001 - any failure is a mismatch
                mismatches.append(f"{name}/{feat.feature_id}: {exc}")
            checked += 1
    record(7, not mismatches and len(benchmarks.NAMES) >= 12,
           f"{len(benchmarks.NAMES)} programs x 100 inputs, {checked} evaluators, "
           f"mismatches {mismatches[:3]}")


def test_c08_slice_economy():
    ip, schema = instrument(benchmarks.load("readloop"))
    feat = next(f for f in schema.features if f.kind == "loop" and f.function == "main")
    ev = slice_program(ip, feat.global_name)
    report = slice_cost(ev, ip, benchmarks.inputs("readloop", 100, 0), feat.global_name)
    record(8, report.mean <= 0.10,
           f"readloop counter evaluator mean cost ratio {report.mean:.4f} (<= 0.10)")


def test_c09_summary_oracle():
    small = [n for n in benchmarks.NAMES if len(build_sdg(benchmarks.load(n))) <= 40]
    bad = [n for n in small if summary_edges(prepare(benchmarks.load(n)))
           != brute_force_summaries(prepare(benchmarks.load(n)))]
    record(9, small and not bad, f"{len(small)} programs with <= 40 vertices, mismatches {bad}")


def test_c10_feedback_replay():
    bundle = run_pipeline(benchmarks.load("feedback"), benchmarks.inputs("feedback", N_INPUTS, 0),
                          config())
    log = bundle.rejection_log
    ok = len(log) == 2
    if ok:
        first, second = log
        accepted = {a["feature"] for a in first["accepted"]}
        rejected = {r["feature"] for r in first["rejected"]}
        ok = (bool(rejected) and bool(accepted) and not second["rejected"]
              and accepted <= set(second["selected"])
              and not rejected & set(second["selected"])
              and bool(set(second["selected"]) - accepted)
              and all(r["reason"] == "cost" for r in first["rejected"]))
    shape = "; ".join(f"it{e['iteration']}: {len(e['accepted'])} accepted, "
                      f"{len(e['rejected'])} rejected" for e in log)
    record(10, ok, f"{len(log)} iterations ({shape})")


def test_c11_transparency():
    diffs, runs = [], 0
    for name in benchmarks.NAMES:
        prog = benchmarks.load(name)
        ip, _ = instrument(prog)
        for rec in benchmarks.inputs(name, 100, 11):
            a, b = interpret(prog, rec), interpret(ip, rec)
            runs += 1
            if (a.outputs, a.cost, a.trapped) != (b.outputs, b.cost, b.trapped):
                diffs.append(f"{name}/{rec.name}")
    record(11, not diffs, f"{runs} runs over {len(benchmarks.NAMES)} programs, differences {diffs[:3]}")
