import pytest

from perfslice import benchmarks
from perfslice.instrument import (FeatureSchema, InstrumentConfig, feature_vector, instrument,
                                  prune_instrumentation, prune_order, side_channel_header,
                                  side_channel_row)
from perfslice.lang import InputRecord, format_program, interpret, parse
from perfslice.lang import ast as A

SAMPLE = """
fn light() { work(1); }
fn heavy() { work(10); }
fn process(int n) -> int { if (n <= 0) { return 0; } return process(n - 1) + 1; }
fn preprocess() -> int { return readInt(); }
fn compute(int n) {
    for i in 0 .. n {
        try { if (i % 2 == 0) { light(); } else { heavy(); fail(1); } } rescue { work(2); }
    }
}
fn main() {
    int n = preprocess();
    compute(n);
    print(process(n));
    bool flag = n > 2;
    if (flag) { light(); }
}
"""

NESTED = """
fn main() {
    while (!eof()) {
        int n = readInt();
        for i in 0 .. n { work(1); }
    }
}
"""


def kinds(schema, kind, function=None):
    return [f for f in schema.features
            if f.kind == kind and function in (None, f.function)]


def fid(schema, kind, function, index=0):
    return kinds(schema, kind, function)[index].feature_id


def test_nested_loops_get_first_in_body_counters():
    ip, schema = instrument(parse(NESTED))
    assert len(kinds(schema, "loop")) == 2
    outer = ip.function("main").body[-1]
    assert isinstance(outer, A.While)
    assert isinstance(outer.body[0], A.Probe)
    inner = next(s for s in outer.body if isinstance(s, A.For))
    assert isinstance(inner.body[0], A.Probe)


def test_feature_kinds_and_values():
    ip, schema = instrument(parse(SAMPLE))
    fv = feature_vector(schema, interpret(ip, InputRecord([5])))
    assert len(kinds(schema, "branch")) == 6  # two per if
    assert fv[fid(schema, "call", "process")] == 6  # recursion counted at every entry
    assert fv[fid(schema, "loop", "compute")] == 5
    assert fv[fid(schema, "exception", "compute")] == 2
    assert fv[fid(schema, "branch", "compute", 0)] + fv[fid(schema, "branch", "compute", 1)] == 5
    # n is assigned once: the remaining version slots stay 0
    versions = [f for f in kinds(schema, "varVersion", "main") if f.detail.startswith("n@")]
    assert [fv[f.feature_id] for f in versions] == [5, 0, 0, 0, 0]


def test_else_feature_counts_fall_through():
    ip, schema = instrument(parse(SAMPLE))
    fv = feature_vector(schema, interpret(ip, InputRecord([1])))
    assert fv[fid(schema, "branch", "main", 0)] == 0
    assert fv[fid(schema, "branch", "main", 1)] == 1


def test_version_bound():
    src = "fn main() { int x = 0; for i in 0 .. 9 { x = x + i; } }"
    ip, schema = instrument(parse(src), InstrumentConfig(versions_per_variable=3))
    fv = feature_vector(schema, interpret(ip, InputRecord([])))
    versions = [fv[f.feature_id] for f in kinds(schema, "varVersion") if f.detail.startswith("x@")]
    assert versions == [0, 0, 1]  # x = 0, then 0 + 0, then 0 + 1


def test_loop_counter_counts_iterations():
    ip, schema = instrument(parse("fn main() { int n = readInt(); for i in 0 .. n { work(1); } }"))
    for n in (0, 1, 7):
        fv = feature_vector(schema, interpret(ip, InputRecord([n])))
        assert fv[kinds(schema, "loop")[0].feature_id] == n


@pytest.mark.parametrize("name", benchmarks.NAMES)
def test_transparency_on_benchmarks(name):
    prog = benchmarks.load(name)
    ip, _ = instrument(prog)
    for rec in benchmarks.inputs(name, 10, 3):
        a, b = interpret(prog, rec), interpret(ip, rec)
        assert (a.outputs, a.cost, a.trapped) == (b.outputs, b.cost, b.trapped)


def test_ids_stable_across_reinstrumentation():
    _, s1 = instrument(parse(SAMPLE))
    _, s2 = instrument(parse(SAMPLE))
    assert s1.ids == s2.ids
    assert len(set(s1.ids)) == len(s1.ids)


def test_instrumentation_is_deterministic_text():
    a, _ = instrument(parse(SAMPLE))
    b, _ = instrument(parse(SAMPLE))
    assert format_program(a) == format_program(b)


def test_excluding_everything_gives_empty_schema():
    src = "fn main() { work(1); }"
    ip, schema = instrument(parse(src), InstrumentConfig(exclude_functions=["main"]))
    assert schema.features == []


def test_schema_json_round_trip():
    _, schema = instrument(parse(SAMPLE))
    assert FeatureSchema.from_json(schema.to_json()) == schema


def test_side_channel_row_matches_header():
    ip, schema = instrument(parse(SAMPLE))
    r = interpret(ip, InputRecord([3]))
    header = side_channel_header(schema)
    row = side_channel_row(schema, r)
    assert header[0] == "cost" and row[0] == r.cost
    assert len(header) == len(row) == len(schema.features) + 1


def test_prune_within_budget_is_noop():
    ip, schema = instrument(parse(SAMPLE))
    hits = {label: 1 for label in schema.probes}
    out, s2 = prune_instrumentation(ip, schema, hits, 0.05, total_cost=len(hits) * 50)
    assert out is ip and s2 is schema


def test_prune_removes_hottest_until_under_budget():
    # overhead 8 units per 100 cost; budget 5%
    hits = {"a": 4, "b": 3, "c": 1}
    assert prune_order(hits, 100, 0.05) == ["a"]
    assert prune_order(hits, 100, 0.001) == ["a", "b", "c"]


def test_single_hot_site_removed():
    ip, schema = instrument(parse(SAMPLE))
    r = interpret(ip, InputRecord([5]))
    hot = fid(schema, "loop", "compute")
    hits = {label: 0 for label in schema.probes}
    hits[hot] = 1000
    out, s2 = prune_instrumentation(ip, schema, hits, 0.05, total_cost=r.cost * 10)
    assert hot not in s2.probes
    assert set(s2.probes) == set(schema.probes) - {hot}
    assert hot not in s2.ids
    # the pruned program still runs and is still transparent
    assert interpret(out, InputRecord([5])).cost == r.cost
