"""Whole-program facts the dependence graphs need.

* points-to sets for array-typed variables (allocation-site abstraction),
* transitive MOD/REF sets of abstract locations per function,
* which functions may unwind through a ``fail`` to their caller.

Abstract locations are tuples: ``("global", name)``, ``("site", h)`` for any
element of an array allocated at site ``h``, ``("input",)`` for the input
cursor, plus function-local ``("local", name)``.
"""
from __future__ import annotations

from ..lang import ast as A
from ..lang.checker import local_types

INPUT = ("input",)
RET = ("ret",)
EXC = ("exc",)
READS = ("read", "readInt")


def calls_in(e) -> list:
    """User calls inside ``e`` in evaluation order (arguments before the call)."""
    out = []

    def visit(x):
        for c in A.sub_exprs(x):
            visit(c)
        if isinstance(x, A.Call):
            out.append(x)

    if e is not None:
        visit(e)
    return out


def has_read(e) -> bool:
    return any(isinstance(x, A.Builtin) and x.name in READS for x in A.walk_expr(e))


class ProgramInfo:
    def __init__(self, program: A.Program):
        self.program = program
        self.functions = {fn.name: fn for fn in program.functions}
        self.ltypes = {fn.name: local_types(fn) for fn in program.functions}
        self.gtypes = {g.name: g.type for g in program.globals}
        self.global_sites = {g.name: g.site for g in program.globals if g.site is not None}
        self._points_to()
        self._mod_ref()
        self._may_fail()

    # ------------------------------------------------------------ helpers
    def is_local(self, fn: str, name: str) -> bool:
        return name in self.ltypes[fn]

    def var_loc(self, fn: str, name: str):
        return ("local", name) if self.is_local(fn, name) else ("global", name)

    def var_type(self, fn: str, name: str):
        return self.ltypes[fn].get(name, self.gtypes.get(name))

    # ----------------------------------------------------------- points-to
    def _ptr_key(self, fn, name):
        return ("local", fn, name) if self.is_local(fn, name) else ("global", name)

    def expr_sites(self, fn: str, e) -> set:
        """Allocation sites an array-valued expression may evaluate to."""
        if isinstance(e, A.Var):
            if not self.is_local(fn, e.name) and e.name in self.global_sites:
                return {self.global_sites[e.name]}
            return set(self.pts.get(self._ptr_key(fn, e.name), ()))
        if isinstance(e, A.NewArray):
            return {e.site}
        if isinstance(e, A.Call):
            return set(self.pts.get(("ret", e.name), ()))
        return set()

    def _points_to(self):
        self.pts: dict = {}
        constraints = []  # (target key, fn, expr)
        for fn in self.program.functions:
            types = self.ltypes[fn.name]
            for s in A.walk_stmts(fn.body):
                if isinstance(s, A.VarDecl) and s.init is not None and A.is_array(s.type):
                    constraints.append((("local", fn.name, s.name), fn.name, s.init))
                elif isinstance(s, A.Assign) and s.index is None and A.is_array(types.get(s.name)):
                    constraints.append((("local", fn.name, s.name), fn.name, s.value))
                elif isinstance(s, A.Return) and s.value is not None and A.is_array(fn.ret):
                    constraints.append((("ret", fn.name), fn.name, s.value))
                for e in A.stmt_exprs(s):
                    for call in calls_in(e):
                        callee = self.functions[call.name]
                        for p, arg in zip(callee.params, call.args):
                            if A.is_array(p.type):
                                constraints.append((("local", callee.name, p.name), fn.name, arg))
        changed = True
        while changed:
            changed = False
            for key, fn, e in constraints:
                new = self.expr_sites(fn, e)
                cur = self.pts.setdefault(key, set())
                if not new <= cur:
                    cur |= new
                    changed = True

    # ------------------------------------------------------------ mod/ref
    def expr_refs(self, fn: str, e) -> set:
        """Non-local locations read while evaluating ``e`` (excluding callees)."""
        refs = set()
        for x in A.walk_expr(e):
            if isinstance(x, A.Var) and not self.is_local(fn, x.name) and x.name not in self.global_sites:
                refs.add(("global", x.name))
            elif isinstance(x, A.Index):
                refs |= {("site", h) for h in self.expr_sites(fn, x.base)}
            elif isinstance(x, A.Builtin) and x.name in READS + ("eof",):
                refs.add(INPUT)
        return refs

    def _mod_ref(self):
        direct_mod, direct_ref, callees = {}, {}, {}
        for fn in self.program.functions:
            mod, ref, cs = set(), set(), set()
            for s in A.walk_stmts(fn.body):
                for e in A.stmt_exprs(s):
                    ref |= self.expr_refs(fn.name, e)
                    if has_read(e):
                        mod.add(INPUT)
                    cs |= {c.name for c in calls_in(e)}
                if isinstance(s, (A.VarDecl, A.Assign)) and not self.is_local(fn.name, s.name):
                    if isinstance(s, A.Assign) and s.index is not None:
                        mod |= {("site", h) for h in self.expr_sites(fn.name, A.Var(0, 0, 0, s.name))}
                    else:
                        mod.add(("global", s.name))
                elif isinstance(s, A.Assign) and s.index is not None:
                    mod |= {("site", h) for h in self.expr_sites(fn.name, A.Var(0, 0, 0, s.name))}
            direct_mod[fn.name], direct_ref[fn.name], callees[fn.name] = mod, ref, cs
        self.callees = callees
        self.mod = {k: set(v) for k, v in direct_mod.items()}
        self.ref = {k: set(v) for k, v in direct_ref.items()}
        changed = True
        while changed:
            changed = False
            for f, cs in callees.items():
                for g in cs:
                    if not self.mod[g] <= self.mod[f]:
                        self.mod[f] |= self.mod[g]
                        changed = True
                    if not self.ref[g] <= self.ref[f]:
                        self.ref[f] |= self.ref[g]
                        changed = True

    # ----------------------------------------------------------- may-fail
    def _may_fail(self):
        self.may_fail = {fn.name: False for fn in self.program.functions}

        def unprotected(stmts):
            for s in stmts:
                yield s
                if isinstance(s, A.Try):
                    yield from unprotected(s.handler)
                else:
                    for block in A.child_blocks(s):
                        yield from unprotected(block)

        changed = True
        while changed:
            changed = False
            for fn in self.program.functions:
                if self.may_fail[fn.name]:
                    continue
                for s in unprotected(fn.body):
                    if isinstance(s, A.Fail) or any(
                            self.may_fail[c.name] for e in A.stmt_exprs(s) for c in calls_in(e)):
                        self.may_fail[fn.name] = True
                        changed = True
                        break

    # ------------------------------------------------------------- ports
    def formal_in_ports(self, fn: str) -> list:
        f = self.functions[fn]
        ports = [("param", i) for i in range(len(f.params))]
        return ports + sorted(self.ref[fn] | self.mod[fn], key=repr)

    def formal_out_ports(self, fn: str) -> list:
        f = self.functions[fn]
        ports = sorted(self.mod[fn], key=repr)
        if f.ret != "void":
            ports.append(RET)
        if self.may_fail[fn]:
            ports.append(EXC)
        return ports
