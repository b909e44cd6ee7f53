"""Render a MiniImp AST back to source text that re-parses to the same tree."""
from __future__ import annotations

from . import ast as A

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


def format_expr(e, prec: int = 0) -> str:
    if isinstance(e, A.IntLit):
        s = str(e.value)
        return f"({s})" if e.value < 0 and prec > 0 else s
    if isinstance(e, A.FloatLit):
        s = repr(float(e.value))
        if "e" in s and "." not in s.split("e")[0]:
            mant, exp = s.split("e")
            s = f"{mant}.0e{exp}"
        return f"({s})" if e.value < 0 and prec > 0 else s
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Index):
        return f"{format_expr(e.base, 8)}[{format_expr(e.index)}]"
    if isinstance(e, A.Unary):
        return f"{e.op}{format_expr(e.operand, 7)}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        # left-associative: the right operand needs strictly higher precedence
        s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, (A.Call, A.Builtin)):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, A.NewArray):
        return f"new {e.elem}[{format_expr(e.size)}]"
    raise TypeError(f"not an expression: {e!r}")


def _block(stmts, depth: int) -> list:
    lines = []
    for s in stmts:
        lines.extend(_stmt(s, depth))
    return lines


def _stmt(s, depth: int) -> list:
    pad = "    " * depth
    if isinstance(s, A.VarDecl):
        init = f" = {format_expr(s.init)}" if s.init is not None else ""
        return [f"{pad}{s.type} {s.name}{init};"]
    if isinstance(s, A.Assign):
        target = s.name if s.index is None else f"{s.name}[{format_expr(s.index)}]"
        return [f"{pad}{target} = {format_expr(s.value)};"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({format_expr(s.cond)}) {{"] + _block(s.then, depth + 1)
        if s.orelse is not None:
            lines.append(f"{pad}}} else {{")
            lines.extend(_block(s.orelse, depth + 1))
        return lines + [f"{pad}}}"]
    if isinstance(s, A.While):
        return [f"{pad}while ({format_expr(s.cond)}) {{"] + _block(s.body, depth + 1) + [f"{pad}}}"]
    if isinstance(s, A.For):
        head = f"{pad}for {s.var} in {format_expr(s.lo)} .. {format_expr(s.hi)} {{"
        return [head] + _block(s.body, depth + 1) + [f"{pad}}}"]
    if isinstance(s, A.ExprStmt):
        return [f"{pad}{format_expr(s.call)};"]
    if isinstance(s, A.Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {format_expr(s.value)};"]
    if isinstance(s, A.Print):
        return [f"{pad}print({format_expr(s.value)});"]
    if isinstance(s, A.Work):
        return [f"{pad}work({format_expr(s.value)});"]
    if isinstance(s, A.Fail):
        return [f"{pad}fail({format_expr(s.value)});"]
    if isinstance(s, A.Try):
        return ([f"{pad}try {{"] + _block(s.body, depth + 1) + [f"{pad}}} rescue {{"]
                + _block(s.handler, depth + 1) + [f"{pad}}}"])
    if isinstance(s, A.Probe):
        return [f'{pad}probe "{s.label}" {{'] + _block(s.body, depth + 1) + [f"{pad}}}"]
    raise TypeError(f"not a statement: {s!r}")


def format_program(program: A.Program) -> str:
    lines = []
    for g in program.globals:
        if g.size is not None:
            lines.append(f"global {A.elem_type(g.type)}[{g.size}] {g.name};")
        elif g.init is not None:
            lines.append(f"global {g.type} {g.name} = {format_expr(g.init)};")
        else:
            lines.append(f"global {g.type} {g.name};")
    if program.globals:
        lines.append("")
    for fn in program.functions:
        params = ", ".join(f"{p.type} {p.name}" for p in fn.params)
        ret = f" -> {fn.ret}" if fn.ret != "void" else ""
        lines.append(f"fn {fn.name}({params}){ret} {{")
        lines.extend(_block(fn.body, 1))
        lines.append("}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
