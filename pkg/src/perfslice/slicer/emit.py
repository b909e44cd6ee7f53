"""Turn a slice's vertex set back into a runnable MiniImp program."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from ..lang import ast as A
from ..lang.checker import check, local_types
from .reach import SliceCriterion


class SliceError(RuntimeError):
    """The emitted program is not well formed; the repair step missed something."""


@dataclass
class EmitInfo:
    retained: list = field(default_factory=list)  # (function, stmt id, line, col, kind)
    decl_repairs: list = field(default_factory=list)  # (function, name, type)
    defaulted_args: list = field(default_factory=list)  # (call id, callee, param)

    @property
    def repair_count(self) -> int:
        # bare declarations plus the trailing print
        return len(self.decl_repairs) + 1


class _Emitter:
    def __init__(self, program: A.Program, sdg, vertices: set):
        self.src = program
        self.out = A.Program([], [], program.entry, program.next_id, program.next_site)
        self.functions = {fn.name: fn for fn in program.functions}
        self.kept_stmts = set()
        self.kept_calls = set()
        self.kept_args = set()
        for v in vertices:
            vx = sdg.vertices[v]
            if vx.kind == "stmt":
                self.kept_stmts.add(vx.stmt)
            elif vx.kind == "call":
                self.kept_calls.add(vx.call)
            elif vx.kind == "actual-in" and vx.port[0] == "param":
                self.kept_args.add((vx.call, vx.port[1]))
        self.info = EmitInfo()

    # --------------------------------------------------------- expressions
    def default_arg(self, t: str):
        out = self.out
        if A.is_array(t):
            return A.NewArray(out.fresh_id(), 0, 0, A.elem_type(t), A.IntLit(out.fresh_id(), 0, 0, 0),
                              out.fresh_site())
        lit = {"int": A.IntLit, "float": A.FloatLit, "bool": A.BoolLit}[t]
        return lit(out.fresh_id(), 0, 0, A.default_value(t))

    def expr(self, e):
        if e is None:
            return None
        if isinstance(e, A.Call):
            callee = self.functions[e.name]
            args = []
            for j, a in enumerate(e.args):
                if (e.id, j) in self.kept_args:
                    args.append(self.expr(a))
                else:
                    args.append(self.default_arg(callee.params[j].type))
                    self.info.defaulted_args.append((e.id, e.name, callee.params[j].name))
            return A.Call(e.id, e.line, e.col, e.name, args)
        e = copy.copy(e)
        if isinstance(e, A.Index):
            e.base, e.index = self.expr(e.base), self.expr(e.index)
        elif isinstance(e, A.Unary):
            e.operand = self.expr(e.operand)
        elif isinstance(e, A.Binary):
            e.left, e.right = self.expr(e.left), self.expr(e.right)
        elif isinstance(e, A.Builtin):
            e.args = [self.expr(a) for a in e.args]
        elif isinstance(e, A.NewArray):
            e.size = self.expr(e.size)
        return e

    def top_calls(self, e) -> list:
        if isinstance(e, A.Call):
            return [e]
        out = []
        for c in A.sub_exprs(e):
            out.extend(self.top_calls(c))
        return out

    # ---------------------------------------------------------- statements
    def block(self, stmts, fn) -> list:
        out = []
        for s in stmts:
            out.extend(self.stmt(s, fn))
        return out

    def has_kept(self, stmts) -> bool:
        for s in A.walk_stmts(stmts):
            if s.id in self.kept_stmts:
                return True
            for e in A.stmt_exprs(s):
                if any(c.id in self.kept_calls for c in A.walk_expr(e) if isinstance(c, A.Call)):
                    return True
        return False

    def keep(self, s, fn, kind=None):
        self.info.retained.append((fn, s.id, s.line, s.col, kind or type(s).__name__))

    def stmt(self, s, fn) -> list:
        kept = s.id in self.kept_stmts
        if isinstance(s, A.Probe):
            body = self.block(s.body, fn)
            return [A.Probe(s.id, s.line, s.col, s.label, body)] if body else []
        if isinstance(s, A.Try):
            if not self.has_kept(s.body) and not self.has_kept(s.handler):
                return []
            self.keep(s, fn)
            return [A.Try(s.id, s.line, s.col, self.block(s.body, fn), self.block(s.handler, fn))]
        if isinstance(s, (A.If, A.While, A.For)):
            inner = any(self.has_kept(b) for b in A.child_blocks(s))
            if not kept:
                if inner:
                    raise SliceError(f"statement at line {s.line} kept without its guard")
                return []
            self.keep(s, fn)
            if isinstance(s, A.If):
                orelse = self.block(s.orelse, fn) if s.orelse is not None else []
                return [A.If(s.id, s.line, s.col, self.expr(s.cond), self.block(s.then, fn),
                             orelse or None)]
            if isinstance(s, A.While):
                return [A.While(s.id, s.line, s.col, self.expr(s.cond), self.block(s.body, fn))]
            return [A.For(s.id, s.line, s.col, s.var, self.expr(s.lo), self.expr(s.hi),
                          self.block(s.body, fn))]
        if kept:
            self.keep(s, fn)
            new = copy.copy(s)
            if isinstance(s, A.VarDecl):
                new.init = self.expr(s.init)
            elif isinstance(s, A.Assign):
                new.index, new.value = self.expr(s.index), self.expr(s.value)
            elif isinstance(s, A.ExprStmt):
                new.call = self.expr(s.call)
            elif isinstance(s, (A.Return,)):
                new.value = self.expr(s.value)
            elif isinstance(s, (A.Print, A.Work, A.Fail)):
                new.value = self.expr(s.value)
            return [new]
        # calls whose side effects matter even though the statement does not
        out = []
        for e in A.stmt_exprs(s):
            for c in self.top_calls(e):
                if c.id in self.kept_calls:
                    sid = s.id if isinstance(s, A.ExprStmt) else self.out.fresh_id()
                    self.keep(s, fn, "Call")
                    out.append(A.ExprStmt(sid, s.line, s.col, self.expr(c)))
        return out

    # -------------------------------------------------------------- whole
    def function(self, fn: A.FunctionDef) -> A.FunctionDef:
        body = self.block(fn.body, fn.name)
        types = local_types(fn)
        declared = {p.name for p in fn.params}
        used = set()
        for s in A.walk_stmts(body):
            if isinstance(s, A.VarDecl):
                declared.add(s.name)
            elif isinstance(s, A.For):
                declared.add(s.var)
            elif isinstance(s, A.Assign):
                used.add(s.name)
            for e in A.stmt_exprs(s):
                used |= {x.name for x in A.walk_expr(e) if isinstance(x, A.Var)}
        repairs = []
        for name in sorted(used - declared):
            if name in types:
                repairs.append(A.VarDecl(self.out.fresh_id(), fn.line, fn.col, types[name], name))
                self.info.decl_repairs.append((fn.name, name, types[name]))
        self.used_names |= used
        return A.FunctionDef(fn.id, fn.line, fn.col, fn.name, list(fn.params), fn.ret,
                             repairs + body)

    def run(self, criterion: SliceCriterion) -> A.Program:
        self.used_names = {criterion.variable}
        emitted = {fn.name: self.function(fn) for fn in self.src.functions}
        main = emitted[self.src.entry]
        main.body.append(A.Print(self.out.fresh_id(), main.line, main.col,
                                 A.Var(self.out.fresh_id(), main.line, main.col, criterion.variable)))
        # keep functions reachable from main through emitted calls
        live, stack = {self.src.entry}, [self.src.entry]
        while stack:
            f = emitted[stack.pop()]
            for s in A.walk_stmts(f.body):
                for e in A.stmt_exprs(s):
                    for c in A.walk_expr(e):
                        if isinstance(c, A.Call) and c.name not in live:
                            live.add(c.name)
                            stack.append(c.name)
        self.out.functions = [emitted[fn.name] for fn in self.src.functions if fn.name in live]
        names = set()
        for fn in self.out.functions:
            for s in A.walk_stmts(fn.body):
                if isinstance(s, A.Assign):
                    names.add(s.name)
                for e in A.stmt_exprs(s):
                    names |= {x.name for x in A.walk_expr(e) if isinstance(x, A.Var)}
        names.add(criterion.variable)
        self.out.globals = [copy.deepcopy(g) for g in self.src.globals if g.name in names]
        return self.out


def emit_slice(program: A.Program, vertices: set, criterion: SliceCriterion, sdg,
               info_out: list = None) -> A.Program:
    """Executable sub-program computing ``criterion`` from the kept vertices.

    Raises :class:`SliceError` when the result does not pass ``check``.
    """
    if criterion.function != program.entry:
        raise SliceError("evaluators can only be emitted for criteria at the entry function's exit")
    em = _Emitter(program, sdg, vertices)
    out = em.run(criterion)
    diags = check(out)
    if diags:
        raise SliceError("emitted slice does not check: " + "; ".join(map(str, diags)))
    if info_out is not None:
        info_out.append(em.info)
    return out


def manifest(criterion: SliceCriterion, info: EmitInfo, cost_report=None) -> str:
    doc = {
        "criterion": {"variable": criterion.variable, "function": criterion.function},
        "retained": [{"function": f, "id": i, "line": ln, "col": c, "kind": k}
                     for f, i, ln, c, k in info.retained],
        "declarationRepairs": [{"function": f, "name": n, "type": t} for f, n, t in info.decl_repairs],
        "defaultedArguments": [{"call": c, "callee": f, "param": p} for c, f, p in info.defaulted_args],
        "cost": cost_report.to_dict() if cost_report is not None else None,
    }
    return json.dumps(doc, indent=2)
