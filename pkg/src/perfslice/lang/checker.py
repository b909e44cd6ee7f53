"""Static checks: name resolution, arity, a small type discipline, ``main``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .parser import BUILTINS

NUMERIC = ("int", "float")


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message} [{self.rule}]"


def local_types(fn: A.FunctionDef) -> dict:
    """Map every parameter, local and loop variable of ``fn`` to its type.

    Locals are function-scoped; a ``for`` variable without an explicit
    declaration is an implicit ``int`` local.
    """
    types = {p.name: p.type for p in fn.params}
    for s in A.walk_stmts(fn.body):
        if isinstance(s, A.VarDecl):
            types.setdefault(s.name, s.type)
        elif isinstance(s, A.For):
            types.setdefault(s.var, "int")
    return types


def assignable(target: Optional[str], value: Optional[str]) -> bool:
    if target is None or value is None:
        return True  # an earlier diagnostic already covers it
    return target == value or (target == "float" and value == "int")


class _Checker:
    def __init__(self, program: A.Program):
        self.program = program
        self.diags: list = []
        self.functions = {}
        self.globals = {}
        self.fn: Optional[A.FunctionDef] = None
        self.locals: dict = {}

    def report(self, rule, message, node=None):
        line = getattr(node, "line", 0)
        col = getattr(node, "col", 0)
        self.diags.append(Diagnostic(rule, message, line, col))

    def run(self) -> list:
        p = self.program
        for g in p.globals:
            if g.name in self.globals:
                self.report("duplicate-global", f"duplicate global {g.name}", g)
            self.globals[g.name] = g.type
            if g.init is not None:
                t = self.literal_type(g.init)
                if not assignable(g.type, t):
                    self.report("type", f"global {g.name}: cannot initialize {g.type} with {t}", g)
        for fn in p.functions:
            if fn.name in self.functions:
                self.report("duplicate-function", f"duplicate function {fn.name}", fn)
            if fn.name in BUILTINS:
                self.report("duplicate-function", f"function {fn.name} shadows a builtin", fn)
            self.functions[fn.name] = fn
        main = self.functions.get(p.entry)
        if main is None:
            self.report("missing-main", f"no function named {p.entry}")
        elif main.params:
            self.report("main-signature", f"{p.entry} must not take parameters", main)
        for fn in p.functions:
            self.check_function(fn)
        return self.diags

    def literal_type(self, e):
        if isinstance(e, A.IntLit):
            return "int"
        if isinstance(e, A.FloatLit):
            return "float"
        if isinstance(e, A.BoolLit):
            return "bool"
        return None

    def check_function(self, fn: A.FunctionDef):
        self.fn = fn
        self.locals = {}
        for p in fn.params:
            if p.name in self.locals:
                self.report("duplicate-declaration", f"duplicate parameter {p.name} in {fn.name}", fn)
            self.locals[p.name] = p.type
        for s in A.walk_stmts(fn.body):
            if isinstance(s, A.VarDecl):
                if s.name in self.locals:
                    self.report("duplicate-declaration", f"duplicate declaration of {s.name} in {fn.name}", s)
                self.locals[s.name] = s.type
        for s in A.walk_stmts(fn.body):
            if isinstance(s, A.For):
                declared = self.locals.setdefault(s.var, "int")
                if declared != "int":
                    self.report("type", f"loop variable {s.var} must be int", s)
        self.check_block(fn.body)

    def var_type(self, name, node):
        if name in self.locals:
            return self.locals[name]
        if name in self.globals:
            return self.globals[name]
        self.report("undeclared-variable", f"undeclared variable {name}", node)
        return None

    def check_block(self, stmts):
        for s in stmts:
            self.check_stmt(s)

    def expect(self, e, wanted, what):
        t = self.expr(e)
        if t is not None and t not in wanted:
            self.report("type", f"{what} must be {' or '.join(wanted)}, not {t}", e)
        return t

    def check_stmt(self, s):
        if isinstance(s, A.VarDecl):
            if s.init is not None:
                t = self.expr(s.init)
                if not assignable(s.type, t):
                    self.report("type", f"cannot initialize {s.type} {s.name} with {t}", s)
        elif isinstance(s, A.Assign):
            target = self.var_type(s.name, s)
            if s.index is not None:
                self.expect(s.index, ("int",), "array index")
                if target is not None and not A.is_array(target):
                    self.report("type", f"{s.name} is not an array", s)
                    target = None
                elif target is not None:
                    target = A.elem_type(target)
            elif A.is_array(target) and s.name not in self.locals:
                self.report("global-array-assign", f"global array {s.name} cannot be reassigned", s)
            t = self.expr(s.value)
            if not assignable(target, t):
                self.report("type", f"cannot assign {t} to {target} {s.name}", s)
        elif isinstance(s, A.If):
            self.expect(s.cond, ("bool",), "condition")
            self.check_block(s.then)
            if s.orelse is not None:
                self.check_block(s.orelse)
        elif isinstance(s, A.While):
            self.expect(s.cond, ("bool",), "condition")
            self.check_block(s.body)
        elif isinstance(s, A.For):
            self.expect(s.lo, ("int",), "loop bound")
            self.expect(s.hi, ("int",), "loop bound")
            self.check_block(s.body)
        elif isinstance(s, A.ExprStmt):
            self.call(s.call, statement=True)
        elif isinstance(s, A.Return):
            ret = self.fn.ret
            if s.value is None:
                if ret != "void":
                    self.report("return", f"{self.fn.name} must return {ret}", s)
            elif ret == "void":
                self.report("return", f"{self.fn.name} returns no value", s)
            else:
                t = self.expr(s.value)
                if not assignable(ret, t):
                    self.report("type", f"cannot return {t} from {self.fn.name} -> {ret}", s)
        elif isinstance(s, A.Print):
            self.expect(s.value, ("int", "float", "bool"), "print argument")
        elif isinstance(s, A.Work):
            self.expect(s.value, NUMERIC, "work amount")
        elif isinstance(s, A.Fail):
            self.expect(s.value, ("int",), "fail code")
        elif isinstance(s, (A.Try, A.Probe)):
            for block in A.child_blocks(s):
                self.check_block(block)

    def call(self, e: A.Call, statement=False):
        fn = self.functions.get(e.name)
        arg_types = [self.expr(a) for a in e.args]
        if fn is None:
            self.report("undefined-function", f"call to undefined function {e.name}", e)
            return None
        if len(e.args) != len(fn.params):
            self.report("arity", f"{e.name} expects {len(fn.params)} argument(s), got {len(e.args)}", e)
            return fn.ret
        for p, t, a in zip(fn.params, arg_types, e.args):
            if not assignable(p.type, t):
                self.report("type", f"argument {p.name} of {e.name} expects {p.type}, got {t}", a)
        if fn.ret == "void" and not statement:
            self.report("type", f"{e.name} returns no value", e)
            return None
        return fn.ret

    def expr(self, e) -> Optional[str]:
        if isinstance(e, (A.IntLit, A.FloatLit, A.BoolLit)):
            return self.literal_type(e)
        if isinstance(e, A.Var):
            return self.var_type(e.name, e)
        if isinstance(e, A.Index):
            base = self.expr(e.base)
            self.expect(e.index, ("int",), "array index")
            if base is None:
                return None
            if not A.is_array(base):
                self.report("type", f"cannot index a value of type {base}", e)
                return None
            return A.elem_type(base)
        if isinstance(e, A.Unary):
            if e.op == "!":
                self.expect(e.operand, ("bool",), "operand of !")
                return "bool"
            return self.expect(e.operand, NUMERIC, "operand of unary -")
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.Builtin):
            if e.name == "len":
                t = self.expr(e.args[0])
                if t is not None and not A.is_array(t):
                    self.report("type", "len expects an array", e)
                return "int"
            return {"read": "float", "readInt": "int", "eof": "bool"}[e.name]
        if isinstance(e, A.NewArray):
            self.expect(e.size, ("int",), "array size")
            return e.elem + "[]"
        return None

    def binary(self, e: A.Binary):
        op = e.op
        if op in ("&&", "||"):
            self.expect(e.left, ("bool",), f"operand of {op}")
            self.expect(e.right, ("bool",), f"operand of {op}")
            return "bool"
        if op in ("==", "!="):
            lt, rt = self.expr(e.left), self.expr(e.right)
            if lt is not None and rt is not None:
                if A.is_array(lt) or A.is_array(rt) or ((lt == "bool") != (rt == "bool")):
                    self.report("type", f"cannot compare {lt} with {rt}", e)
            return "bool"
        lt = self.expect(e.left, NUMERIC, f"operand of {op}")
        rt = self.expect(e.right, NUMERIC, f"operand of {op}")
        if op in ("<", "<=", ">", ">="):
            return "bool"
        if op == "%" and "float" in (lt, rt):
            self.report("type", "% requires int operands", e)
        if lt is None or rt is None:
            return None
        return "int" if lt == rt == "int" else "float"


def check(program: A.Program) -> list:
    """Return the diagnostics for ``program``; empty means well-formed."""
    return _Checker(program).run()
