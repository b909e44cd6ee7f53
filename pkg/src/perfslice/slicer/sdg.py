"""System dependence graph: every function's PDG plus the interprocedural edges."""
from __future__ import annotations

from ..lang import ast as A
from .analysis import ProgramInfo
from .graph import CALL, LINK_IN, LINK_OUT, DependenceGraph
from .pdg import build_pdg


class SystemDependenceGraph(DependenceGraph):
    def __init__(self, program: A.Program, info: ProgramInfo):
        super().__init__()
        self.program = program
        self.info = info
        self.pdgs: dict = {}
        self.stmt_vertices: dict = {}  # AST statement id -> vertices
        self.call_sites: dict = {}  # AST call id -> CallSite
        self.summary_done = False

    def sites_calling(self, fn: str) -> list:
        return [s for s in self.call_sites.values() if s.callee == fn]

    def formal_out(self, fn: str, port):
        return self.pdgs[fn].formal_out.get(port)

    def stats(self) -> dict:
        kinds = {}
        for ps in self.pred:
            for _, k in ps:
                kinds[k] = kinds.get(k, 0) + 1
        return {"vertices": len(self.vertices), "edges": kinds}


def build_sdg(program: A.Program) -> SystemDependenceGraph:
    """PDGs for all functions, joined by call and linkage edges."""
    info = ProgramInfo(program)
    sdg = SystemDependenceGraph(program, info)
    registry = {"stmts": sdg.stmt_vertices, "calls": sdg.call_sites}
    for fn in program.functions:
        sdg.pdgs[fn.name] = build_pdg(fn, program, info, sdg, registry)
    for site in sdg.call_sites.values():
        callee = sdg.pdgs[site.callee]
        sdg.add_edge(site.vertex, callee.entry, CALL)
        for port, v in site.actual_in.items():
            sdg.add_edge(v, callee.formal_in[port], LINK_IN)
        for port, v in site.actual_out.items():
            sdg.add_edge(callee.formal_out[port], v, LINK_OUT)
    return sdg
