"""AST node classes for MiniImp.

Every node carries a program-unique integer ``id`` plus the source line and
column it came from.  Types are plain strings: ``int``, ``float``, ``bool``,
``void`` and the array forms ``int[]``, ``float[]``, ``bool[]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

SCALAR_TYPES = ("int", "float", "bool")
ARRAY_TYPES = ("int[]", "float[]", "bool[]")


def is_array(t: Optional[str]) -> bool:
    return t is not None and t.endswith("[]")


def elem_type(t: str) -> str:
    return t[:-2]


def default_value(t: str):
    """Zero value a variable of type ``t`` starts with (arrays excluded)."""
    return {"int": 0, "float": 0.0, "bool": False}[t]


# ---------------------------------------------------------------- expressions


@dataclass
class Node:
    id: int
    line: int
    col: int


@dataclass
class IntLit(Node):
    value: int


@dataclass
class FloatLit(Node):
    value: float


@dataclass
class BoolLit(Node):
    value: bool


@dataclass
class Var(Node):
    name: str


@dataclass
class Index(Node):
    base: "Expr"
    index: "Expr"


@dataclass
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class Call(Node):
    name: str
    args: list


@dataclass
class Builtin(Node):
    # read, readInt, eof, len
    name: str
    args: list


@dataclass
class NewArray(Node):
    elem: str
    size: "Expr"
    site: int


Expr = Union[IntLit, FloatLit, BoolLit, Var, Index, Unary, Binary, Call, Builtin, NewArray]

# ----------------------------------------------------------------- statements


@dataclass
class VarDecl(Node):
    type: str
    name: str
    init: Optional[Expr] = None


@dataclass
class Assign(Node):
    name: str
    index: Optional[Expr]
    value: Expr


@dataclass
class If(Node):
    cond: Expr
    then: list
    orelse: Optional[list] = None


@dataclass
class While(Node):
    cond: Expr
    body: list


@dataclass
class For(Node):
    var: str
    lo: Expr
    hi: Expr
    body: list


@dataclass
class ExprStmt(Node):
    call: Call


@dataclass
class Return(Node):
    value: Optional[Expr] = None


@dataclass
class Print(Node):
    value: Expr


@dataclass
class Work(Node):
    value: Expr


@dataclass
class Fail(Node):
    value: Expr


@dataclass
class Try(Node):
    body: list
    handler: list


@dataclass
class Probe(Node):
    """Zero-cost block inserted by the instrumentor; ``label`` names the site."""

    label: str
    body: list


Stmt = Union[VarDecl, Assign, If, While, For, ExprStmt, Return, Print, Work, Fail, Try, Probe]

# -------------------------------------------------------------- declarations


@dataclass
class Param:
    type: str
    name: str


@dataclass
class GlobalDecl(Node):
    type: str
    name: str
    init: Optional[Expr] = None  # literal, scalars only
    size: Optional[int] = None  # arrays only
    site: Optional[int] = None  # arrays only


@dataclass
class FunctionDef(Node):
    name: str
    params: list
    ret: str
    body: list


@dataclass
class Program:
    globals: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    entry: str = "main"
    next_id: int = 0
    next_site: int = 0

    def fresh_id(self) -> int:
        self.next_id += 1
        return self.next_id

    def fresh_site(self) -> int:
        self.next_site += 1
        return self.next_site

    def function(self, name: str) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None

    def global_decl(self, name: str) -> Optional[GlobalDecl]:
        for g in self.globals:
            if g.name == name:
                return g
        return None


# ------------------------------------------------------------------ traversal


def child_blocks(stmt) -> list:
    """Nested statement lists of a compound statement, in source order."""
    if isinstance(stmt, If):
        return [stmt.then] + ([stmt.orelse] if stmt.orelse is not None else [])
    if isinstance(stmt, (While, For, Probe)):
        return [stmt.body]
    if isinstance(stmt, Try):
        return [stmt.body, stmt.handler]
    return []


def walk_stmts(stmts) -> Iterator:
    """Pre-order iteration over all statements in a block."""
    for s in stmts:
        yield s
        for block in child_blocks(s):
            yield from walk_stmts(block)


def stmt_exprs(stmt) -> list:
    """Top-level expressions owned directly by a statement."""
    if isinstance(stmt, VarDecl):
        return [stmt.init] if stmt.init is not None else []
    if isinstance(stmt, Assign):
        return ([stmt.index] if stmt.index is not None else []) + [stmt.value]
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    if isinstance(stmt, For):
        return [stmt.lo, stmt.hi]
    if isinstance(stmt, ExprStmt):
        return [stmt.call]
    if isinstance(stmt, Return):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, (Print, Work, Fail)):
        return [stmt.value]
    return []


def sub_exprs(e) -> list:
    if isinstance(e, Index):
        return [e.base, e.index]
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Binary):
        return [e.left, e.right]
    if isinstance(e, (Call, Builtin)):
        return list(e.args)
    if isinstance(e, NewArray):
        return [e.size]
    return []


def walk_expr(e) -> Iterator:
    yield e
    for c in sub_exprs(e):
        yield from walk_expr(c)
