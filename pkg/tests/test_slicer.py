import json

import pytest

from perfslice import benchmarks
from perfslice.instrument import instrument
from perfslice.lang import InputRecord, format_program, interpret, parse
from perfslice.lang import ast as A
from perfslice.slicer import (CriterionError, SliceCriterion, SliceUnsound, add_summary_edges,
                              baseline_runs, build_pdg, build_sdg, manifest, prepare, slice_cost,
                              slice_program, two_pass_reachable)
from perfslice.slicer.graph import CALL, CONTROL, DATA, LINK_IN, LINK_OUT, SUMMARY
from perfslice.slicer.reach import criterion_vertex
from perfslice.slicer.summary import summary_edges
from conftest import records
from oracles import brute_force_summaries, valid_path_slice

READ_LOOP = """
fn expensive(float x) -> int {
    work(1000);
    return 1;
}

fn main() {
    int j = 0;
    int count = 0;
    while (!eof()) {
        count = count + 1;
        float line = read();
        j = j + expensive(line);
    }
    print(j);
}
"""

TWO_SITES = """
global int a;
global int b;
fn helper(int x, int y) -> int { return x + 1; }
fn main() {
    int p = readInt();
    int q = readInt();
    a = helper(p, q);
    b = helper(q, p);
}
"""


def stmt_of(fn, cls, nth=0):
    found = [s for s in A.walk_stmts(fn.body) if isinstance(s, cls)]
    return found[nth]


def preds(sdg, v, kind):
    return {u for u, k in sdg.pred[v] if k == kind}


def stmt_vertex(sdg, stmt):
    return next(v for v in sdg.stmt_vertices[stmt.id] if sdg.vertices[v].kind == "stmt")


def loop_feature(schema):
    return next(f for f in schema.features if f.kind == "loop" and f.function == "main")


# ------------------------------------------------------------------ PDG

def test_read_loop_pdg_edges():
    prog = parse(READ_LOOP)
    sdg = build_sdg(prog)
    main = prog.function("main")
    loop = stmt_of(main, A.While)
    count_inc, _, acc = loop.body
    w, inc, j = (stmt_vertex(sdg, s) for s in (loop, count_inc, acc))
    assert j in preds(sdg, j, DATA)  # loop-carried
    assert w in preds(sdg, j, CONTROL)
    assert preds(sdg, inc, CONTROL) == {w}
    assert preds(sdg, inc, DATA) - {inc} == {stmt_vertex(sdg, main.body[1])}


def test_straight_line_single_data_edge():
    prog = parse("fn main() { int a = 1; int b = a; }")
    pdg = build_pdg(prog.function("main"), prog)
    a, b = (stmt_vertex_pdg(pdg, s) for s in prog.function("main").body)
    data = [(u, v) for u, v, k in pdg.edges() if k == DATA and {u, v} <= {a, b}]
    assert data == [(a, b)]
    # only the entry controls the two statements
    assert all(pdg.graph.vertices[u].kind == "entry" for u, v, k in pdg.edges()
               if k == CONTROL and v in (a, b))


def stmt_vertex_pdg(pdg, stmt):
    return next(v for v in pdg.vertices if pdg.graph.vertices[v].stmt == stmt.id
                and pdg.graph.vertices[v].kind == "stmt")


def test_global_write_gets_formal_out():
    prog = parse("global int g; fn set() { g = 4; } fn main() { set(); }")
    sdg = build_sdg(prog)
    pdg = sdg.pdgs["set"]
    assert ("global", "g") in pdg.formal_out
    # the write always happens, so the incoming value never reaches the exit
    fin, fout = pdg.formal_in[("global", "g")], pdg.formal_out[("global", "g")]
    assert not sdg.has_edge(fin, fout, DATA)


def test_call_site_vertices_match_callee():
    prog = parse("fn helper(int x) -> int { return x * 2; } fn main() { int r = helper(3); }")
    sdg = build_sdg(prog)
    (site,) = sdg.call_sites.values()
    callee = sdg.pdgs["helper"]
    assert set(site.actual_in) == set(callee.formal_in) and ("param", 0) in site.actual_in
    assert set(site.actual_out) == set(callee.formal_out) and ("ret",) in site.actual_out
    assert sdg.has_edge(site.vertex, callee.entry, CALL)
    assert sdg.has_edge(site.actual_in[("param", 0)], callee.formal_in[("param", 0)], LINK_IN)
    assert sdg.has_edge(callee.formal_out[("ret",)], site.actual_out[("ret",)], LINK_OUT)


def test_no_calls_means_no_interprocedural_edges():
    sdg = build_sdg(parse("fn main() { int a = 1; print(a); }"))
    assert sdg.edge_list((CALL, LINK_IN, LINK_OUT)) == []


def test_recursive_call_edge():
    sdg = build_sdg(benchmarks.load("recursion"))
    assert any(sdg.vertices[u].function == sdg.vertices[v].function
               for u, v, _ in sdg.edge_list((CALL,)))


# -------------------------------------------------------------- summaries

def site_summaries(sdg):
    out = set()
    for site in sdg.call_sites.values():
        for pin, x in site.actual_in.items():
            for pout, y in site.actual_out.items():
                if sdg.has_edge(x, y, SUMMARY):
                    out.add((site.callee, pin, pout))
    return out


def test_identity_summary():
    sdg = prepare(parse("fn id(int a) -> int { return a; } fn main() { print(id(readInt())); }"))
    assert site_summaries(sdg) == {("id", ("param", 0), ("ret",))}


def test_first_of_two_summary():
    sdg = prepare(benchmarks.load("tiny_first"))
    pairs = site_summaries(sdg)
    assert ("first", ("param", 0), ("ret",)) in pairs
    assert ("first", ("param", 1), ("ret",)) not in pairs
    assert summary_edges(sdg) == brute_force_summaries(sdg)


@pytest.mark.parametrize("name", ["tiny_identity", "tiny_first", "tiny_mutual", "recursion", "multisite"])
def test_summaries_match_brute_force(name):
    sdg = prepare(benchmarks.load(name))
    assert summary_edges(sdg) == brute_force_summaries(sdg)


def test_mutual_recursion_uses_only_first_parameter():
    sdg = prepare(benchmarks.load("tiny_mutual"))
    pairs = site_summaries(sdg)
    assert ("ping", ("param", 0), ("ret",)) in pairs
    assert ("ping", ("param", 1), ("ret",)) not in pairs


def test_summary_pass_is_idempotent():
    sdg = prepare(benchmarks.load("multisite"))
    before = summary_edges(sdg)
    add_summary_edges(sdg)
    assert summary_edges(sdg) == before


# ----------------------------------------------------------------- slices

def test_read_loop_counter_slice():
    ip, schema = instrument(parse(READ_LOOP))
    feat = loop_feature(schema)
    sdg = prepare(ip)
    kept = two_pass_reachable(sdg, SliceCriterion(feat.global_name))
    main = ip.function("main")
    loop = stmt_of(main, A.While)
    read = next(s for s in loop.body if isinstance(s, A.VarDecl) and s.name == "line")
    acc = next(s for s in loop.body if isinstance(s, A.Assign) and s.name == "j")
    assert stmt_vertex(sdg, loop) in kept
    assert stmt_vertex(sdg, read) in kept
    assert not set(sdg.stmt_vertices[acc.id]) & kept
    text = format_program(slice_program(ip, feat.global_name, sdg))
    assert "expensive" not in text and "j = " not in text
    assert "read()" in text


def test_constant_assignment_slice():
    prog = parse("global int g; fn main() { int x = readInt(); work(x); g = 7; work(50); }")
    text = format_program(slice_program(prog, "g"))
    assert "g = 7;" in text
    assert "work" not in text and "readInt" not in text


def test_context_sensitivity_two_sites():
    prog = parse(TWO_SITES)
    sdg = prepare(prog)
    start = criterion_vertex(sdg, SliceCriterion("a"))
    kept = two_pass_reachable(sdg, SliceCriterion("a"))
    assert kept == valid_path_slice(sdg, start)
    first, second = sorted(sdg.call_sites.values(), key=lambda s: s.call)
    assert first.actual_in[("param", 0)] in kept
    assert not set(second.actual_in.values()) & kept


def test_unassigned_feature_prints_zero():
    prog = parse("global int g; global int h; fn main() { h = 3; }")
    ev = slice_program(prog, "g")
    assert interpret(ev, InputRecord([])).outputs == [0]


def test_unused_parameter_defaulted():
    prog = parse("""
    global int r;
    fn f(int used, int unused) -> int { work(unused); return used * 2; }
    fn main() { int k = readInt(); int w = readInt(); r = f(k, w * 100); }
    """)
    info = []
    ev = slice_program(prog, "r", info_out=info)
    text = format_program(ev)
    assert "fn f(int used, int unused) -> int" in text
    assert "f(k, 0)" in text
    assert info[0].defaulted_args
    assert interpret(ev, InputRecord([4, 9])).globals["r"] == 8


def test_unknown_criterion():
    with pytest.raises(CriterionError):
        slice_program(parse("fn main() { }"), "nope")


def test_slices_are_byte_identical():
    ip, schema = instrument(benchmarks.load("arrays"))
    a = [format_program(slice_program(ip, f.global_name)) for f in schema.features]
    b = [format_program(slice_program(ip, f.global_name, prepare(ip))) for f in schema.features]
    assert a == b


@pytest.mark.parametrize("name", benchmarks.NAMES)
def test_soundness_and_cost_bound(name):
    ip, schema = instrument(benchmarks.load(name))
    sdg = prepare(ip)
    inputs = benchmarks.inputs(name, 15, 21)
    base = baseline_runs(ip, inputs)
    for feat in schema.features:
        info = []
        ev = slice_program(ip, feat.global_name, sdg, info)
        report = slice_cost(ev, ip, inputs, feat.global_name, base)
        for s, o in zip(report.slice_costs, report.original_costs):
            assert s <= o + info[0].repair_count


# ------------------------------------------------------------- slice cost

def test_identity_slice_ratio_one():
    prog = parse("global int g; fn main() { g = readInt(); print(g); }")
    report = slice_cost(prog, prog, records([1], [2]), "g")
    assert report.ratios == [1.0, 1.0]


def test_dropped_work_ratio_by_hand():
    src = """
    global int n;
    fn main() { int k = readInt(); for i in 0 .. k { n = n + 1; work(1000); } }
    """
    prog = parse(src)
    ev = slice_program(prog, "n")
    report = slice_cost(ev, prog, records([4]), "n")
    # original: decl 1 + loop 1 + 4 * (1 + 1 + 1001) = 4014
    # slice: decl 1 + loop 1 + 4 * (1 + 1) + print 1 = 11
    assert report.original_costs == [4014]
    assert report.slice_costs == [11]
    assert report.ratios[0] == pytest.approx(11 / 4014)


def test_constant_criterion_ratio_near_zero():
    prog = parse("global int g = 5; fn main() { int k = readInt(); work(k); }")
    ev = slice_program(prog, "g")
    report = slice_cost(ev, prog, records([5000]), "g")
    assert report.mean < 0.001


def test_unsound_slice_reported_with_input():
    orig = parse("global int g; fn main() { g = readInt(); }")
    wrong = parse("global int g; fn main() { g = 1; }")
    with pytest.raises(SliceUnsound) as err:
        slice_cost(wrong, orig, records([1], [2]), "g")
    assert err.value.input_name == "in1"


def test_manifest_contents():
    prog = parse(READ_LOOP)
    ip, schema = instrument(prog)
    feat = loop_feature(schema)
    info = []
    ev = slice_program(ip, feat.global_name, info_out=info)
    report = slice_cost(ev, ip, records([0.1, 0.7]), feat.global_name)
    doc = json.loads(manifest(SliceCriterion(feat.global_name), info[0], report))
    assert doc["criterion"]["variable"] == feat.global_name
    assert {r["kind"] for r in doc["retained"]} >= {"While"}
    assert doc["cost"]["meanRatio"] == report.mean
