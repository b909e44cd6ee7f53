"""Per-function dependence graphs.

A small CFG is built over the function's statements (one node per
statement, per user call, and two per ``for`` loop).  Control dependence
comes from post-dominators on that CFG; ``return`` and ``fail`` get a fake
fall-through edge so the statements after them depend on them, and a call to
a function that may fail gets an exceptional successor.  Data dependence
comes from reaching definitions over abstract locations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from ..lang import ast as A
from .analysis import EXC, INPUT, READS, RET, ProgramInfo, calls_in, has_read
from .graph import CONTROL, DATA, CallSite, DependenceGraph, ProcedureDependenceGraph


@dataclass
class _Node:
    vertex: Optional[int] = None  # vertex that is control dependent on predicates
    source: Optional[int] = None  # vertex that acts as the predicate when this node branches
    defs: list = field(default_factory=list)  # (loc, vertex, strong)
    uses: list = field(default_factory=list)  # (vertex, loc)
    succ: list = field(default_factory=list)
    fake: list = field(default_factory=list)


class _Builder:
    def __init__(self, graph: DependenceGraph, info: ProgramInfo, fn: A.FunctionDef, registry: dict):
        self.g = graph
        self.info = info
        self.fn = fn
        self.reg = registry
        self.nodes: list = []
        self.pdg = ProcedureDependenceGraph(fn.name, graph)

    # -------------------------------------------------------------- utils
    def vertex(self, kind, **kw) -> int:
        v = self.g.add_vertex(kind, self.fn.name, **kw)
        self.pdg.vertices.append(v)
        return v

    def node(self, **kw) -> int:
        self.nodes.append(_Node(**kw))
        return len(self.nodes) - 1

    def port_loc(self, port):
        if port[0] == "param":
            return ("local", self.fn.params[port[1]].name)
        return port

    def direct_uses(self, e) -> set:
        """Locations read by ``e`` itself; user-call arguments are not entered."""
        out = set()
        if e is None:
            return out
        stack = [e]
        while stack:
            x = stack.pop()
            if isinstance(x, A.Call):
                continue
            if isinstance(x, A.Var):
                if self.info.is_local(self.fn.name, x.name) or x.name not in self.info.global_sites:
                    out.add(self.info.var_loc(self.fn.name, x.name))
            elif isinstance(x, A.Index):
                out |= {("site", h) for h in self.info.expr_sites(self.fn.name, x.base)}
            elif isinstance(x, A.Builtin) and x.name in READS + ("eof",):
                out.add(INPUT)
            stack.extend(A.sub_exprs(x))
        return out

    # ------------------------------------------------------------ calls
    def call_site(self, c: A.Call) -> CallSite:
        info = self.info
        v = self.vertex("call", call=c.id, label=f"call {c.name}")
        site = CallSite(c.id, self.fn.name, c.name, v)
        for port in info.formal_in_ports(c.name):
            site.actual_in[port] = self.vertex("actual-in", call=c.id, port=port)
        for port in info.formal_out_ports(c.name):
            site.actual_out[port] = self.vertex("actual-out", call=c.id, port=port)
        for a in list(site.actual_in.values()) + list(site.actual_out.values()):
            self.g.add_edge(v, a, CONTROL)
        self.pdg.call_sites.append(site)
        self.reg["calls"][c.id] = site
        return site

    def collect(self, e, consumer, cond, out, seq_uses):
        """Create call sites inside ``e`` in evaluation order.

        ``consumer`` is the vertex that uses the value of ``e``; ``out``
        receives ``(site, conditional)`` pairs.
        """
        if e is None:
            return
        if isinstance(e, A.Call):
            site = self.call_site(e)
            for j, arg in enumerate(e.args):
                ain = site.actual_in[("param", j)]
                self.collect(arg, ain, cond, out, seq_uses)
                seq_uses.extend((ain, loc) for loc in self.direct_uses(arg))
            out.append((site, cond))
            if consumer is not None:
                if RET in site.actual_out:
                    self.g.add_edge(site.actual_out[RET], consumer, DATA)
                self.g.add_edge(consumer, site.vertex, CONTROL)
            return
        if isinstance(e, A.Binary) and e.op in ("&&", "||"):
            self.collect(e.left, consumer, cond, out, seq_uses)
            self.collect(e.right, consumer, True, out, seq_uses)
            return
        for sub in A.sub_exprs(e):
            self.collect(sub, consumer, cond, out, seq_uses)

    def chain(self, exprs, owner, ctx):
        """Call nodes for ``exprs``; returns (nodes, sites, seq_uses)."""
        fail_target, caught = ctx
        out, seq_uses = [], []
        for e in exprs:
            self.collect(e, owner, False, out, seq_uses)
        nodes = []
        for site, cond in out:
            n = self.node(vertex=site.vertex)
            node = self.nodes[n]
            for port, ain in site.actual_in.items():
                if port[0] != "param":
                    node.uses.append((ain, port))
            for port, aout in site.actual_out.items():
                if port == RET:
                    continue
                if port == EXC:
                    node.source = aout
                    if not caught:
                        node.defs.append((EXC, aout, True))
                    continue
                strong = not cond and port[0] != "site"
                node.defs.append((port, aout, strong))
            if EXC in site.actual_out:
                node.succ.append(fail_target)
            nodes.append(n)
        return nodes, [s for s, _ in out], seq_uses

    def link(self, nodes, nxt):
        for a, b in zip(nodes, nodes[1:]):
            self.nodes[a].succ.insert(0, b)
        if nodes:
            self.nodes[nodes[-1]].succ.insert(0, nxt)
        return nodes[0] if nodes else nxt

    def spread(self, nodes, uses):
        for n in nodes:
            self.nodes[n].uses.extend(uses)

    def atomic(self, s_vertex, sites):
        # statements that read input are kept whole: the read must stay in order
        group = []
        for site in sites:
            group.append(site.vertex)
            group.extend(v for p, v in site.actual_in.items() if p[0] == "param")
        for x in group:
            self.g.add_edge(s_vertex, x, CONTROL)
            self.g.add_edge(x, s_vertex, CONTROL)

    # ------------------------------------------------------- statements
    def block(self, stmts, nxt, ctx) -> int:
        first = nxt
        for s in reversed(stmts):
            first = self.stmt(s, first, ctx)
        return first

    def stmt(self, s, nxt, ctx) -> int:
        fn = self.fn.name
        info = self.info
        if isinstance(s, A.Probe):
            return self.block(s.body, nxt, ctx)
        if isinstance(s, A.Try):
            handler = self.block(s.handler, nxt, ctx)
            return self.block(s.body, nxt, (handler, True))
        if isinstance(s, A.For):
            return self.for_loop(s, nxt, ctx)

        exprs = A.stmt_exprs(s)
        reads = any(has_read(e) for e in exprs)
        needs_vertex = reads or not isinstance(s, (A.ExprStmt, A.Print, A.Work))
        sv = self.vertex("stmt", stmt=s.id, label=type(s).__name__) if needs_vertex else None
        if sv is not None:
            self.reg["stmts"].setdefault(s.id, []).append(sv)
        calls, sites, seq_uses = self.chain(exprs, sv, ctx)
        if sv is None:
            self.spread(calls, seq_uses)
            return self.link(calls, nxt)

        n = self.node(vertex=sv, source=sv)
        node = self.nodes[n]
        uses = set()
        for e in exprs:
            uses |= self.direct_uses(e)
        if reads:
            self.atomic(sv, sites)
            conditional = any(self._conditional_read(e) for e in exprs)
            node.defs.append((INPUT, sv, not conditional and not sites))
        if isinstance(s, A.VarDecl):
            node.defs.append((("local", s.name), sv, True))
        elif isinstance(s, A.Assign):
            if s.index is None:
                node.defs.append((info.var_loc(fn, s.name), sv, True))
            else:
                if info.is_local(fn, s.name):
                    uses.add(("local", s.name))
                for h in info.expr_sites(fn, A.Var(0, 0, 0, s.name)):
                    node.defs.append((("site", h), sv, False))
        seq = calls + [n]
        self.spread(seq, [(sv, loc) for loc in uses])
        self.spread(seq, seq_uses)
        self.link(calls, n)

        if isinstance(s, A.If):
            then = self.block(s.then, nxt, ctx)
            orelse = self.block(s.orelse, nxt, ctx) if s.orelse is not None else nxt
            node.succ = [then, orelse]
            return calls[0] if calls else n
        if isinstance(s, A.While):
            head = calls[0] if calls else n
            body = self.block(s.body, head, ctx)
            node.succ = [body, nxt]
            return head
        if isinstance(s, A.Return):
            if s.value is not None:
                node.defs.append((RET, sv, True))
            node.succ = [self.exit]
            node.fake = [nxt]
        elif isinstance(s, A.Fail):
            fail_target, caught = ctx
            if not caught:
                node.defs.append((EXC, sv, True))
            node.succ = [fail_target]
            node.fake = [nxt]
        else:
            node.succ = [nxt]
        return calls[0] if calls else n

    def _conditional_read(self, e) -> bool:
        def visit(x, cond):
            if isinstance(x, A.Builtin) and x.name in READS and cond:
                return True
            if isinstance(x, A.Binary) and x.op in ("&&", "||"):
                return visit(x.left, cond) or visit(x.right, True)
            return any(visit(c, cond) for c in A.sub_exprs(x))
        return visit(e, False)

    def for_loop(self, s: A.For, nxt, ctx) -> int:
        init_v = self.vertex("stmt", stmt=s.id, label="For-init")
        head_v = self.vertex("stmt", stmt=s.id, label="For-head")
        self.reg["stmts"].setdefault(s.id, []).extend([init_v, head_v])
        exprs = [s.lo, s.hi]
        reads = any(has_read(e) for e in exprs)
        calls, sites, seq_uses = self.chain(exprs, init_v, ctx)
        var = ("local", s.var)
        bound = ("bound", s.id)
        init = self.node(vertex=init_v, source=init_v,
                         defs=[(var, init_v, True), (bound, init_v, True)])
        if reads:
            self.atomic(init_v, sites)
            self.nodes[init].defs.append((INPUT, init_v, False))
        uses = set()
        for e in exprs:
            uses |= self.direct_uses(e)
        seq = calls + [init]
        self.spread(seq, [(init_v, loc) for loc in uses])
        self.spread(seq, seq_uses)
        self.link(calls, init)
        head = self.node(vertex=head_v, source=head_v, defs=[(var, head_v, True)],
                         uses=[(head_v, var), (head_v, bound)])
        self.nodes[init].succ = [head]
        body = self.block(s.body, head, ctx)
        self.nodes[head].succ = [body, nxt]
        return calls[0] if calls else init

    # --------------------------------------------------------------- main
    def build(self) -> ProcedureDependenceGraph:
        info, fn = self.info, self.fn
        pdg = self.pdg
        pdg.entry = self.vertex("entry", label=f"entry {fn.name}")
        for port in info.formal_in_ports(fn.name):
            pdg.formal_in[port] = self.vertex("formal-in", port=port)
        for port in info.formal_out_ports(fn.name):
            pdg.formal_out[port] = self.vertex("formal-out", port=port)
        for v in list(pdg.formal_in.values()) + list(pdg.formal_out.values()):
            self.g.add_edge(pdg.entry, v, CONTROL)

        entry = self.node(vertex=None, source=pdg.entry,
                          defs=[(self.port_loc(p), v, True) for p, v in pdg.formal_in.items()])
        self.exit = self.node(uses=[(v, p) for p, v in pdg.formal_out.items()])
        first = self.block(fn.body, self.exit, (self.exit, False))
        self.nodes[entry].succ = [first]
        self.nodes[entry].fake = [self.exit]
        self.entry_node = entry
        self._control(entry)
        self._data(entry)
        return pdg

    def _control(self, entry):
        cfg = nx.DiGraph()
        cfg.add_nodes_from(range(len(self.nodes)))
        for i, n in enumerate(self.nodes):
            for j in n.succ + n.fake:
                cfg.add_edge(i, j)
        # nodes stuck in a loop that never reaches exit get a fake exit edge
        reach = nx.ancestors(cfg, self.exit) | {self.exit}
        for i in range(len(self.nodes)):
            if i not in reach:
                cfg.add_edge(i, self.exit)
        ipdom = nx.immediate_dominators(cfg.reverse(copy=False), self.exit)
        for a, b in cfg.edges():
            stop = ipdom.get(a)
            runner = b
            while runner != stop and runner is not None:
                target = self.nodes[runner].vertex
                source = self.nodes[a].source
                if target is not None and source is not None:
                    self.g.add_edge(source, target, CONTROL)
                nxt = ipdom.get(runner)
                if nxt == runner:
                    break
                runner = nxt

    def _data(self, entry):
        nodes = self.nodes
        preds = [[] for _ in nodes]
        for i, n in enumerate(nodes):
            for j in n.succ:
                preds[j].append(i)
        IN = [None] * len(nodes)
        OUT = [None] * len(nodes)
        work = list(range(len(nodes)))
        pending = set(work)
        while work:
            i = work.pop()
            pending.discard(i)
            cur: dict = {}
            for p in preds[i]:
                if OUT[p] is None:
                    continue
                for loc, ds in OUT[p].items():
                    old = cur.get(loc)
                    cur[loc] = ds if old is None else old | ds
            IN[i] = cur
            out = dict(cur)
            for loc, v, strong in nodes[i].defs:
                out[loc] = frozenset([v]) if strong else out.get(loc, frozenset()) | {v}
            if out != OUT[i]:
                OUT[i] = out
                for j in nodes[i].succ:
                    if j not in pending:
                        pending.add(j)
                        work.append(j)
        for i, n in enumerate(nodes):
            if IN[i] is None:
                continue
            for v, loc in n.uses:
                for d in IN[i].get(loc, ()):
                    self.g.add_edge(d, v, DATA)


def build_pdg(function: A.FunctionDef, program: A.Program, info: ProgramInfo = None,
              graph: DependenceGraph = None, registry: dict = None) -> ProcedureDependenceGraph:
    """Dependence graph of one function (vertices go into ``graph``)."""
    info = info or ProgramInfo(program)
    graph = graph if graph is not None else DependenceGraph()
    registry = registry if registry is not None else {"stmts": {}, "calls": {}}
    return _Builder(graph, info, function, registry).build()
