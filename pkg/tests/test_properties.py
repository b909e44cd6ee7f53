"""Property-based checks over randomly generated programs and data."""
from math import comb

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from perfslice.instrument import instrument
from perfslice.lang import InputRecord, format_program, interpret, parse
from perfslice.model import lambda_max, lasso_fit, normalize_and_prune, poly_expand
from perfslice.profile import Dataset
from perfslice.slicer import baseline_runs, prepare, slice_cost, slice_program
from oracles import kkt_violation

GLOBALS = ["g0", "g1"]


@st.composite
def expr(draw, names, depth=0):
    choice = draw(st.integers(0, 5 if depth < 2 else 2))
    if choice == 0 or not names:
        return str(draw(st.integers(0, 9)))
    if choice in (1, 2):
        return draw(st.sampled_from(names))
    if choice == 3:
        return "(readInt() % 5)"
    op = draw(st.sampled_from(["+", "-"]))
    left = draw(expr(names, depth + 1))
    right = draw(expr(names, depth + 1))
    if choice == 5:
        return f"(({left} {op} {right}) % 7)"
    return f"({left} {op} {right})"


def fresh(counter, prefix):
    counter[0] += 1
    return f"{prefix}{counter[0]}"


@st.composite
def block(draw, names, depth, counter, in_helper=False, calls=True):
    out = []
    names = list(names)
    for _ in range(draw(st.integers(1, 3))):
        kind = draw(st.integers(0, 7 if depth < 2 else 2))
        if kind == 0:
            v = fresh(counter, "v")
            out.append(f"int {v} = {draw(expr(names))};")
            names.append(v)
        elif kind == 1:
            # while counters stay read-only so every loop terminates
            target = draw(st.sampled_from([n for n in names if not n.startswith("c")]))
            out.append(f"{target} = {draw(expr(names))};")
        elif kind == 2:
            if calls and not in_helper:
                target = draw(st.sampled_from([n for n in names if not n.startswith("c")]))
                out.append(f"{target} = helper({draw(expr(names))}, {draw(expr(names))});")
            else:
                out.append(f"work({draw(st.integers(0, 20))});")
        elif kind == 3:
            hi = draw(st.integers(0, 4))
            body = draw(block(names, depth + 1, counter, in_helper, calls))
            out.append(f"for {fresh(counter, 'i')} in 0 .. {hi} {{ {body} }}")
        elif kind == 4:
            cond = f"{draw(expr(names))} < {draw(expr(names))}"
            then = draw(block(names, depth + 1, counter, in_helper, calls))
            other = draw(block(names, depth + 1, counter, in_helper, calls))
            out.append(f"if ({cond}) {{ {then} }} else {{ {other} }}")
        elif kind == 5:
            c = fresh(counter, "c")
            body = draw(block(names + [c], depth + 1, counter, in_helper, calls))
            out.append(f"int {c} = 0; while ({c} < {draw(st.integers(0, 3))}) "
                       f"{{ {c} = {c} + 1; {body} }}")
        elif kind == 6:
            cond = f"{draw(expr(names))} == {draw(st.integers(0, 4))}"
            body = draw(block(names, depth + 1, counter, in_helper, calls))
            handler = draw(block(names, depth + 1, counter, in_helper, calls))
            out.append(f"try {{ if ({cond}) {{ fail(1); }} {body} }} rescue {{ {handler} }}")
        else:
            out.append(f"print({draw(expr(names))});")
    return " ".join(out)


@st.composite
def programs(draw):
    counter = [0]
    helper_body = draw(block(["a", "b"] + GLOBALS, 1, counter, in_helper=True))
    main_body = draw(block(GLOBALS, 0, counter))
    return ("global int g0 = 1; global int g1;\n"
            f"fn helper(int a, int b) -> int {{ {helper_body} return a + b; }}\n"
            f"fn main() {{ {main_body} }}\n")


def input_record(seed):
    rng = np.random.default_rng(seed)
    return InputRecord([int(v) for v in rng.integers(0, 100, 600)], f"s{seed}")


SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SLOW
@given(programs(), st.integers(0, 1000))
def test_interpretation_is_deterministic(src, seed):
    prog = parse(src)
    rec = input_record(seed)
    assert interpret(prog, rec) == interpret(prog, rec)


@SLOW
@given(programs())
def test_printer_round_trip(src):
    text = format_program(parse(src))
    assert format_program(parse(text)) == text


@SLOW
@given(programs(), st.integers(0, 1000))
def test_instrumentation_transparent(src, seed):
    prog = parse(src)
    ip, _ = instrument(prog)
    rec = input_record(seed)
    a, b = interpret(prog, rec), interpret(ip, rec)
    assert (a.outputs, a.cost, a.trapped, a.consumed_inputs) == \
        (b.outputs, b.cost, b.trapped, b.consumed_inputs)


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs())
def test_slices_sound_on_random_programs(src):
    ip, schema = instrument(parse(src))
    sdg = prepare(ip)
    inputs = [input_record(s) for s in range(4)]
    base = baseline_runs(ip, inputs)
    for feat in schema.features:
        info = []
        ev = slice_program(ip, feat.global_name, sdg, info)
        report = slice_cost(ev, ip, inputs, feat.global_name, base)
        assert all(s <= o + info[0].repair_count
                   for s, o in zip(report.slice_costs, report.original_costs))


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs())
def test_slices_byte_identical(src):
    def all_slices():
        # parse, instrument and build the graph from scratch each round
        ip, schema = instrument(parse(src))
        sdg = prepare(ip)
        return [format_program(slice_program(ip, f.global_name, sdg)) for f in schema.features]

    assert all_slices() == all_slices()


@given(st.lists(st.integers(-1000, 1000), min_size=0, max_size=20))
def test_input_record_round_trip(values):
    rec = InputRecord(values)
    assert InputRecord.parse(rec.dumps()).values == values


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.001, 0.9))
def test_lasso_kkt_and_monotone(seed, frac):
    rng = np.random.default_rng(seed)
    X = rng.random((40, 8))
    y = X @ rng.normal(0, 1, 8) + rng.normal(0, 0.1, 40)
    lam = frac * lambda_max(X, y)
    trace = []
    b0, beta, _ = lasso_fit(X, y, lam, trace=trace)
    assert kkt_violation(X, y, b0, beta, lam) <= 1e-6
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


@given(st.integers(1, 6), st.integers(1, 4))
def test_poly_count(k, d):
    assert len(poly_expand(list(range(k)), d)) == comb(k + d, d)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_normalization_round_trip(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(-50, 50, (12, 4)).astype(float)
    data = Dataset(rng.random(12) + 1, X, ["a", "b", "c", "d"])
    norm, params = normalize_and_prune(data)
    assert norm.X.min() >= 0 and norm.X.max() <= 1
    cols = [data.feature_ids.index(f) for f in params.feature_ids]
    assert np.allclose(params.denormalize(norm.X), X[:, cols], rtol=0, atol=1e-12)
