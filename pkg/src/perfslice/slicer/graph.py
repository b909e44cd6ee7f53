"""Vertex/edge container shared by procedure and system dependence graphs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

# edge kinds
DATA = "data"
CONTROL = "control"
SUMMARY = "summary"
CALL = "call"
LINK_IN = "linkage-entry"
LINK_OUT = "linkage-exit"
INTRA = (DATA, CONTROL)


@dataclass(frozen=True)
class AbstractLocation:
    """A storage cell the analysis tracks: local, global, array site or input cursor."""

    kind: str  # "local" | "global" | "site" | "input"
    name: object = None

    @classmethod
    def from_key(cls, key: tuple) -> "AbstractLocation":
        return cls(key[0], key[1] if len(key) > 1 else None)

    def __str__(self):
        return self.kind if self.name is None else f"{self.kind}:{self.name}"


@dataclass
class Vertex:
    id: int
    kind: str  # entry | formal-in | formal-out | stmt | call | actual-in | actual-out
    function: str
    stmt: Optional[int] = None  # AST statement id
    call: Optional[int] = None  # AST call expression id
    port: Optional[tuple] = None
    label: str = ""


@dataclass
class CallSite:
    call: int  # AST call id
    caller: str
    callee: str
    vertex: int
    actual_in: dict = field(default_factory=dict)  # port -> vertex
    actual_out: dict = field(default_factory=dict)


@dataclass
class ProcedureDependenceGraph:
    function: str
    graph: "DependenceGraph"
    entry: int = -1
    formal_in: dict = field(default_factory=dict)  # port -> vertex
    formal_out: dict = field(default_factory=dict)
    call_sites: list = field(default_factory=list)
    vertices: list = field(default_factory=list)

    def edges(self, kinds=INTRA) -> set:
        mine = set(self.vertices)
        return {(u, v, k) for (u, v, k) in self.graph.edge_list(kinds) if u in mine and v in mine}


class DependenceGraph:
    def __init__(self):
        self.vertices: list = []
        self.pred: list = []
        self.succ: list = []

    def add_vertex(self, kind, function, **kw) -> int:
        v = Vertex(len(self.vertices), kind, function, **kw)
        self.vertices.append(v)
        self.pred.append(set())
        self.succ.append(set())
        return v.id

    def add_edge(self, u: int, v: int, kind: str) -> bool:
        # loop-carried data self-dependences are kept; other self-loops say nothing
        if (u == v and kind != DATA) or (u, kind) in self.pred[v]:
            return False
        self.pred[v].add((u, kind))
        self.succ[u].add((v, kind))
        return True

    def has_edge(self, u, v, kind) -> bool:
        return (u, kind) in self.pred[v]

    def edge_list(self, kinds=None) -> list:
        out = []
        for v, ps in enumerate(self.pred):
            for u, k in ps:
                if kinds is None or k in kinds:
                    out.append((u, v, k))
        return sorted(out)

    def __len__(self):
        return len(self.vertices)
