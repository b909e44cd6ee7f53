"""Feature instrumentation: AST-to-AST insertion of zero-cost feature probes.

Five feature kinds are collected: loop iteration counts, branch-arm counts,
function invocation counts, rescue-handler entry counts and the first ``k``
values assigned to each scalar variable.  Every probe is a ``probe`` block,
so it costs nothing in the interpreter and the measured cost of the
instrumented program equals that of the original.
"""
from __future__ import annotations

import copy
import json
import logging
from dataclasses import asdict, dataclass, field

from .lang import ast as A
from .lang.checker import local_types
from .lang.interp import RunResult

log = logging.getLogger(__name__)

KINDS = ("loop", "branch", "call", "exception", "varVersion")
GLOBAL_SCOPE = "global"


@dataclass
class InstrumentConfig:
    versions_per_variable: int = 5
    track_locals: bool = True
    track_globals: bool = True
    exclude_functions: list = field(default_factory=list)

    def __post_init__(self):
        if self.versions_per_variable < 1:
            raise ValueError("versions_per_variable must be >= 1")


@dataclass
class FeatureDecl:
    feature_id: str
    kind: str
    function: str
    line: int
    detail: str
    global_name: str


@dataclass
class FeatureSchema:
    features: list
    versions_per_variable: int
    # probe label -> feature ids it maintains
    probes: dict = field(default_factory=dict)

    @property
    def ids(self) -> list:
        return [f.feature_id for f in self.features]

    def get(self, feature_id: str) -> FeatureDecl:
        for f in self.features:
            if f.feature_id == feature_id:
                return f
        raise KeyError(feature_id)

    def to_json(self) -> str:
        return json.dumps({
            "versionsPerVariable": self.versions_per_variable,
            "features": [asdict(f) for f in self.features],
            "probes": self.probes,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FeatureSchema":
        doc = json.loads(text)
        return cls([FeatureDecl(**f) for f in doc["features"]],
                   doc["versionsPerVariable"], doc.get("probes", {}))


def global_name_for(feature_id: str) -> str:
    return "ft_" + feature_id.replace(":", "_")


def _ident(name: str) -> str:
    return name.replace(":", "_")


class _Instrumentor:
    def __init__(self, program: A.Program, config: InstrumentConfig):
        self.p = program
        self.cfg = config
        self.features: list = []
        self.probes: dict = {}
        self.ordinals: dict = {}
        self.tracked: dict = {}  # (scope, var) -> (base id, counter global, slot globals)
        self.new_globals: list = []
        self.gtypes = {g.name: g.type for g in program.globals}

    # -- node builders
    def nid(self):
        return self.p.fresh_id()

    def var(self, name, line):
        return A.Var(self.nid(), line, 0, name)

    def int_lit(self, v, line):
        return A.IntLit(self.nid(), line, 0, v)

    def incr(self, name, line):
        value = A.Binary(self.nid(), line, 0, "+", self.var(name, line), self.int_lit(1, line))
        return A.Assign(self.nid(), line, 0, name, None, value)

    def probe(self, label, body, line, feature_ids):
        self.probes[label] = list(feature_ids)
        return A.Probe(self.nid(), line, 0, label, body)

    def add_global(self, name, typ, line):
        if name in self.gtypes:
            raise ValueError(f"instrumentation global {name} collides with an existing name")
        self.gtypes[name] = typ
        self.new_globals.append(A.GlobalDecl(self.nid(), line, 0, typ, name, None))

    def new_feature(self, kind, fn_name, line, detail):
        key = (kind, fn_name, line)
        ordinal = self.ordinals.get(key, 0)
        self.ordinals[key] = ordinal + 1
        fid = f"{kind}:{fn_name}:{line}:{ordinal}"
        return fid

    def counter(self, kind, fn_name, line, detail):
        fid = self.new_feature(kind, fn_name, line, detail)
        gname = global_name_for(fid)
        self.add_global(gname, "int", line)
        self.features.append(FeatureDecl(fid, kind, fn_name, line, detail, gname))
        return self.probe(fid, [self.incr(gname, line)], line, [fid])

    # -- traversal
    def run(self):
        fn_names = {fn.name for fn in self.p.functions}
        for fn in self.p.functions:
            for s in A.walk_stmts(fn.body):
                names = [getattr(s, "name", None), getattr(s, "var", None)]
                for n in names:
                    if n and n.startswith("ft_") and n not in fn_names:
                        raise ValueError(f"user identifier {n} uses the reserved ft_ prefix")
        excluded = set(self.cfg.exclude_functions)
        for fn in self.p.functions:
            if fn.name in excluded:
                continue
            self.fn = fn
            self.ltypes = local_types(fn)
            body = self.block(fn.body)
            entry = self.counter("call", fn.name, fn.line, fn.name)
            fn.body = [entry] + body
        self.p.globals.extend(self.new_globals)
        if not self.features:
            log.warning("instrumentation produced an empty feature schema")
        return self.p, FeatureSchema(self.features, self.cfg.versions_per_variable, self.probes)

    def block(self, stmts):
        out = []
        for s in stmts:
            out.append(s)
            self.stmt(s)
            rec = self.version_probe(s)
            if rec is not None:
                out.append(rec)
        return out

    def stmt(self, s):
        fname = self.fn.name
        if isinstance(s, A.If):
            then_probe = self.counter("branch", fname, s.line, "then")
            else_probe = self.counter("branch", fname, s.line, "else")
            s.then = [then_probe] + self.block(s.then)
            s.orelse = [else_probe] + (self.block(s.orelse) if s.orelse is not None else [])
        elif isinstance(s, (A.While, A.For)):
            p = self.counter("loop", fname, s.line, "while" if isinstance(s, A.While) else "for")
            s.body = [p] + self.block(s.body)
        elif isinstance(s, A.Try):
            s.body = self.block(s.body)
            p = self.counter("exception", fname, s.line, "rescue")
            s.handler = [p] + self.block(s.handler)

    # -- variable versions
    def scope_of(self, name):
        if name in self.ltypes:
            return self.fn.name, self.ltypes[name]
        return GLOBAL_SCOPE, self.gtypes.get(name)

    def decl_line(self, name):
        if name in self.ltypes:
            if any(p.name == name for p in self.fn.params):
                return self.fn.line
            for s in A.walk_stmts(self.fn.body):
                if isinstance(s, A.VarDecl) and s.name == name:
                    return s.line
                if isinstance(s, A.For) and s.var == name:
                    return s.line
        g = self.p.global_decl(name)
        return g.line if g is not None else 0

    def version_probe(self, s):
        if isinstance(s, A.VarDecl) and s.init is not None:
            name = s.name
        elif isinstance(s, A.Assign) and s.index is None:
            name = s.name
        else:
            return None
        scope, typ = self.scope_of(name)
        if typ is None or A.is_array(typ):
            return None
        if scope == GLOBAL_SCOPE and not self.cfg.track_globals:
            return None
        if scope != GLOBAL_SCOPE and not self.cfg.track_locals:
            return None
        key = (scope, name)
        if key not in self.tracked:
            line = self.decl_line(name)
            base = self.new_feature("varVersion", scope, line, name)
            cnt = global_name_for(base) + "_n"
            self.add_global(cnt, "int", line)
            slots = []
            for j in range(self.cfg.versions_per_variable):
                fid = f"{base}:v{j}"
                gname = global_name_for(fid)
                self.add_global(gname, typ, line)
                self.features.append(FeatureDecl(fid, "varVersion", scope, line, f"{name}@{j}", gname))
                slots.append(gname)
            self.tracked[key] = [base, cnt, slots, 0]
        entry = self.tracked[key]
        base, cnt, slots, nsite = entry
        entry[3] += 1
        ln = s.line
        records = []
        for j, slot in enumerate(slots):
            cond = A.Binary(self.nid(), ln, 0, "==", self.var(cnt, ln), self.int_lit(j, ln))
            records.append(A.If(self.nid(), ln, 0, cond, [A.Assign(self.nid(), ln, 0, slot, None, self.var(name, ln))]))
        records.append(self.incr(cnt, ln))
        guard = A.Binary(self.nid(), ln, 0, "<", self.var(cnt, ln), self.int_lit(len(slots), ln))
        body = [A.If(self.nid(), ln, 0, guard, records)]
        return self.probe(f"{base}#{nsite}", body, ln, [f"{base}:v{j}" for j in range(len(slots))])


def instrument(program: A.Program, config: InstrumentConfig = None):
    """Return ``(instrumented_program, schema)``; the input program is untouched."""
    config = config or InstrumentConfig()
    return _Instrumentor(copy.deepcopy(program), config).run()


def feature_vector(schema: FeatureSchema, result: RunResult) -> dict:
    """Read the feature values left in the globals of an instrumented run."""
    values = {}
    for f in schema.features:
        v = result.globals.get(f.global_name, 0)
        values[f.feature_id] = int(v) if isinstance(v, bool) else v
    return values


def side_channel_header(schema: FeatureSchema) -> list:
    return ["cost"] + [f"f_{fid}" for fid in schema.ids]


def side_channel_row(schema: FeatureSchema, result: RunResult) -> list:
    fv = feature_vector(schema, result)
    return [result.cost] + [fv[fid] for fid in schema.ids]


# ------------------------------------------------------------------ pruning


def _remove_probes(stmts, labels):
    out = []
    for s in stmts:
        if isinstance(s, A.Probe) and s.label in labels:
            continue
        if isinstance(s, A.If):
            s.then = _remove_probes(s.then, labels)
            if s.orelse is not None:
                s.orelse = _remove_probes(s.orelse, labels)
        elif isinstance(s, (A.While, A.For)):
            s.body = _remove_probes(s.body, labels)
        elif isinstance(s, A.Try):
            s.body = _remove_probes(s.body, labels)
            s.handler = _remove_probes(s.handler, labels)
        out.append(s)
    return out


def prune_order(hits: dict, total_cost: float, budget: float) -> list:
    """Probe labels to drop, hottest first, until overhead/cost <= budget."""
    remaining = sum(hits.values())
    order = []
    for label, count in sorted(hits.items(), key=lambda kv: (-kv[1], kv[0])):
        if total_cost > 0 and remaining / total_cost <= budget:
            break
        if total_cost <= 0 and remaining == 0:
            break
        order.append(label)
        remaining -= count
    return order


def prune_instrumentation(program: A.Program, schema: FeatureSchema, hits: dict,
                          budget: float, total_cost: float):
    """Greedily remove the hottest probes until estimated overhead <= ``budget``.

    ``hits`` maps probe labels to execution counts summed over profiling runs
    and ``total_cost`` is the summed program cost of those runs; each probe
    execution is estimated at one unit of overhead.
    """
    if not 0 < budget < 1:
        raise ValueError("budget must lie in (0, 1)")
    all_hits = {label: hits.get(label, 0) for label in schema.probes}
    drop = set(prune_order(all_hits, total_cost, budget))
    if not drop:
        return program, schema
    program = copy.deepcopy(program)
    for fn in program.functions:
        fn.body = _remove_probes(fn.body, drop)
    probes = {k: v for k, v in schema.probes.items() if k not in drop}
    alive = {fid for fids in probes.values() for fid in fids}
    features = [f for f in schema.features if f.feature_id in alive]
    keep = {f.global_name for f in features}
    for f in features:
        if f.kind == "varVersion":
            keep.add(global_name_for(f.feature_id.rsplit(":", 1)[0]) + "_n")
    dropped_globals = {f.global_name for f in schema.features} - keep
    dropped_globals |= {global_name_for(f.feature_id.rsplit(":", 1)[0]) + "_n"
                        for f in schema.features if f.kind == "varVersion"} - keep
    program.globals = [g for g in program.globals if g.name not in dropped_globals]
    log.info("pruned %d probe site(s): %s", len(drop), sorted(drop))
    return program, FeatureSchema(features, schema.versions_per_variable, probes)
