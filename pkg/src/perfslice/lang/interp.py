"""Deterministic tree-walking interpreter with an explicit cost model.

Cost stands in for execution time: each executed statement costs
``CostConfig.statement`` units, loops cost ``loop_setup`` once plus
``loop_iteration`` per iteration, and ``work(e)`` adds ``e`` units on top of
its statement cost.  Expression evaluation is free, as is everything inside a
``probe`` block.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ast as A
from .checker import local_types

INT_MIN, INT_MAX = -(2**63), 2**63 - 1
MAX_CALL_DEPTH = 400


@dataclass
class CostConfig:
    statement: int = 1
    loop_setup: int = 1
    loop_iteration: int = 1
    work_unit: int = 1


@dataclass
class InputRecord:
    values: list
    name: str = ""

    @classmethod
    def parse(cls, text: str, name: str = "") -> "InputRecord":
        values = []
        for tok in text.split():
            values.append(int(tok) if re.fullmatch(r"[-+]?\d+", tok) else float(tok))
        return cls(values, name)

    @classmethod
    def load(cls, path) -> "InputRecord":
        path = Path(path)
        return cls.parse(path.read_text(), path.name)

    def dumps(self) -> str:
        return " ".join(repr(v) if isinstance(v, float) else str(v) for v in self.values) + "\n"


@dataclass
class RunResult:
    outputs: list
    cost: int
    trapped: bool
    consumed_inputs: int
    globals: dict = field(default_factory=dict)
    probe_hits: dict = field(default_factory=dict)
    fail_code: Optional[int] = None


class MiniImpRuntimeError(Exception):
    """A genuine runtime fault (not a ``fail``): bad index, division by zero..."""

    def __init__(self, message: str, node=None, cost: int = 0):
        self.line = getattr(node, "line", 0)
        self.col = getattr(node, "col", 0)
        self.message = message
        self.cost = cost
        super().__init__(f"{self.line}:{self.col}: {message}")


class ArrayValue:
    __slots__ = ("elem", "data", "site")

    def __init__(self, elem: str, data: list, site: Optional[int]):
        self.elem = elem
        self.data = data
        self.site = site

    def __repr__(self):
        return f"ArrayValue({self.elem}, {self.data!r})"


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Fail(Exception):
    def __init__(self, code):
        self.code = code


def _coerce(t: str, v):
    if t == "float" and not isinstance(v, float) and not isinstance(v, bool):
        return float(v)
    return v


def _default(t: str):
    if A.is_array(t):
        return ArrayValue(A.elem_type(t), [], None)
    return A.default_value(t)


def _check_int(v, node, interp):
    if isinstance(v, int) and not isinstance(v, bool) and not INT_MIN <= v <= INT_MAX:
        raise MiniImpRuntimeError("integer overflow", node, interp.cost)
    return v


class Interpreter:
    def __init__(self, program: A.Program, inputs: InputRecord = None, weights: CostConfig = None):
        self.program = program
        self.weights = weights or CostConfig()
        self.inputs = list(inputs.values) if inputs is not None else []
        self.pos = 0
        self.cost = 0
        self.free = 0
        self.depth = 0
        self.outputs = []
        self.probe_hits = {}
        self.functions = {fn.name: fn for fn in program.functions}
        self.ltypes = {fn.name: local_types(fn) for fn in program.functions}
        self.gtypes = {g.name: g.type for g in program.globals}
        self.globals = {}
        for g in program.globals:
            if g.size is not None:
                et = A.elem_type(g.type)
                self.globals[g.name] = ArrayValue(et, [A.default_value(et)] * g.size, g.site)
            elif g.init is not None:
                self.globals[g.name] = _coerce(g.type, g.init.value)
            else:
                self.globals[g.name] = A.default_value(g.type)
        self._stmt = {
            A.VarDecl: self.s_decl, A.Assign: self.s_assign, A.If: self.s_if,
            A.While: self.s_while, A.For: self.s_for, A.ExprStmt: self.s_exprstmt,
            A.Return: self.s_return, A.Print: self.s_print, A.Work: self.s_work,
            A.Fail: self.s_fail, A.Try: self.s_try, A.Probe: self.s_probe,
        }
        self._expr = {
            A.IntLit: self.e_lit, A.FloatLit: self.e_lit, A.BoolLit: self.e_lit,
            A.Var: self.e_var, A.Index: self.e_index, A.Unary: self.e_unary,
            A.Binary: self.e_binary, A.Call: self.e_call, A.Builtin: self.e_builtin,
            A.NewArray: self.e_new,
        }

    # ------------------------------------------------------------- driver
    def run(self) -> RunResult:
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 30 * MAX_CALL_DEPTH + 1000))
        trapped, code = False, None
        try:
            self.invoke(self.functions[self.program.entry], [], None)
        except _Fail as f:
            trapped, code = True, f.code
        finally:
            sys.setrecursionlimit(limit)
        snapshot = {}
        for name, v in self.globals.items():
            snapshot[name] = list(v.data) if isinstance(v, ArrayValue) else v
        return RunResult(self.outputs, self.cost, trapped, self.pos, snapshot,
                         dict(self.probe_hits), code)

    def charge(self, units: int):
        if not self.free:
            self.cost += units

    def invoke(self, fn: A.FunctionDef, args: list, node):
        if self.depth >= MAX_CALL_DEPTH:
            raise MiniImpRuntimeError("call depth exceeded", node, self.cost)
        types = self.ltypes[fn.name]
        frame = {name: _default(t) for name, t in types.items()}
        for p, v in zip(fn.params, args):
            frame[p.name] = _coerce(p.type, v)
        self.depth += 1
        try:
            self.block(fn.body, frame, fn)
        except _Return as r:
            return _coerce(fn.ret, r.value) if fn.ret != "void" else None
        finally:
            self.depth -= 1
        return None if fn.ret == "void" else _default(fn.ret)

    def block(self, stmts, frame, fn):
        dispatch = self._stmt
        for s in stmts:
            dispatch[type(s)](s, frame, fn)

    # -------------------------------------------------------- statements
    def store(self, name, value, frame, fn):
        if name in frame:
            frame[name] = _coerce(self.ltypes[fn.name][name], value)
        else:
            self.globals[name] = _coerce(self.gtypes[name], value)

    def s_decl(self, s, frame, fn):
        self.charge(self.weights.statement)
        if s.init is not None:
            frame[s.name] = _coerce(s.type, self.eval(s.init, frame, fn))
        else:
            frame[s.name] = _default(s.type)

    def s_assign(self, s, frame, fn):
        self.charge(self.weights.statement)
        if s.index is None:
            self.store(s.name, self.eval(s.value, frame, fn), frame, fn)
            return
        arr = frame[s.name] if s.name in frame else self.globals[s.name]
        i = self.eval(s.index, frame, fn)
        v = self.eval(s.value, frame, fn)
        if not 0 <= i < len(arr.data):
            raise MiniImpRuntimeError(f"index {i} out of bounds for {s.name} (length {len(arr.data)})", s, self.cost)
        arr.data[i] = _coerce(arr.elem, v)

    def s_if(self, s, frame, fn):
        self.charge(self.weights.statement)
        if self.eval(s.cond, frame, fn):
            self.block(s.then, frame, fn)
        elif s.orelse is not None:
            self.block(s.orelse, frame, fn)

    def s_while(self, s, frame, fn):
        self.charge(self.weights.loop_setup)
        while self.eval(s.cond, frame, fn):
            self.charge(self.weights.loop_iteration)
            self.block(s.body, frame, fn)

    def s_for(self, s, frame, fn):
        self.charge(self.weights.loop_setup)
        lo = self.eval(s.lo, frame, fn)
        hi = self.eval(s.hi, frame, fn)
        i = lo
        while i < hi:
            frame[s.var] = i
            self.charge(self.weights.loop_iteration)
            self.block(s.body, frame, fn)
            i = frame[s.var] + 1
        frame[s.var] = i if hi > lo else lo

    def s_exprstmt(self, s, frame, fn):
        self.charge(self.weights.statement)
        self.eval(s.call, frame, fn)

    def s_return(self, s, frame, fn):
        self.charge(self.weights.statement)
        raise _Return(None if s.value is None else self.eval(s.value, frame, fn))

    def s_print(self, s, frame, fn):
        self.charge(self.weights.statement)
        self.outputs.append(self.eval(s.value, frame, fn))

    def s_work(self, s, frame, fn):
        self.charge(self.weights.statement)
        amount = self.eval(s.value, frame, fn)
        self.charge(max(0, int(amount)) * self.weights.work_unit)

    def s_fail(self, s, frame, fn):
        self.charge(self.weights.statement)
        raise _Fail(self.eval(s.value, frame, fn))

    def s_try(self, s, frame, fn):
        self.charge(self.weights.statement)
        try:
            self.block(s.body, frame, fn)
        except _Fail:
            self.block(s.handler, frame, fn)

    def s_probe(self, s, frame, fn):
        self.probe_hits[s.label] = self.probe_hits.get(s.label, 0) + 1
        self.free += 1
        try:
            self.block(s.body, frame, fn)
        finally:
            self.free -= 1

    # ------------------------------------------------------- expressions
    def eval(self, e, frame, fn):
        return self._expr[type(e)](e, frame, fn)

    def e_lit(self, e, frame, fn):
        return e.value

    def e_var(self, e, frame, fn):
        if e.name in frame:
            return frame[e.name]
        return self.globals[e.name]

    def e_index(self, e, frame, fn):
        arr = self.eval(e.base, frame, fn)
        i = self.eval(e.index, frame, fn)
        if not 0 <= i < len(arr.data):
            raise MiniImpRuntimeError(f"index {i} out of bounds (length {len(arr.data)})", e, self.cost)
        return arr.data[i]

    def e_unary(self, e, frame, fn):
        v = self.eval(e.operand, frame, fn)
        if e.op == "!":
            return not v
        return _check_int(-v, e, self)

    def e_binary(self, e, frame, fn):
        op = e.op
        if op == "&&":
            return bool(self.eval(e.left, frame, fn)) and bool(self.eval(e.right, frame, fn))
        if op == "||":
            return bool(self.eval(e.left, frame, fn)) or bool(self.eval(e.right, frame, fn))
        a = self.eval(e.left, frame, fn)
        b = self.eval(e.right, frame, fn)
        if op == "+":
            return _check_int(a + b, e, self)
        if op == "-":
            return _check_int(a - b, e, self)
        if op == "*":
            return _check_int(a * b, e, self)
        if op == "/" or op == "%":
            if b == 0:
                raise MiniImpRuntimeError("division by zero", e, self.cost)
            if isinstance(a, float) or isinstance(b, float):
                return a / b if op == "/" else a - b * int(a / b)
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            return _check_int(q, e, self) if op == "/" else a - b * q
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        raise MiniImpRuntimeError(f"unknown operator {op}", e, self.cost)

    def e_call(self, e, frame, fn):
        args = [self.eval(a, frame, fn) for a in e.args]
        return self.invoke(self.functions[e.name], args, e)

    def e_builtin(self, e, frame, fn):
        name = e.name
        if name == "eof":
            return self.pos >= len(self.inputs)
        if name == "len":
            return len(self.eval(e.args[0], frame, fn).data)
        if self.pos >= len(self.inputs):
            raise MiniImpRuntimeError(f"{name}() past end of input", e, self.cost)
        v = self.inputs[self.pos]
        self.pos += 1
        if name == "readInt":
            if float(v) != int(v):
                raise MiniImpRuntimeError(f"readInt() got non-integer {v}", e, self.cost)
            return int(v)
        return float(v)

    def e_new(self, e, frame, fn):
        n = self.eval(e.size, frame, fn)
        if n < 0:
            raise MiniImpRuntimeError(f"negative array size {n}", e, self.cost)
        return ArrayValue(e.elem, [A.default_value(e.elem)] * n, e.site)


def interpret(program: A.Program, inputs: InputRecord = None, weights: CostConfig = None) -> RunResult:
    """Run ``program`` on ``inputs``; raises :class:`MiniImpRuntimeError` on faults."""
    return Interpreter(program, inputs, weights).run()
