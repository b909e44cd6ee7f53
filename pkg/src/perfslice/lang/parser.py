"""Lexer and recursive-descent parser for MiniImp source text."""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast as A

KEYWORDS = {
    "global", "fn", "int", "float", "bool", "if", "else", "while", "for", "in",
    "return", "print", "work", "fail", "try", "rescue", "probe", "true", "false",
    "new",
}
BUILTINS = {"read": 0, "readInt": 0, "eof": 0, "len": 1}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|->|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\];,])
    """,
    re.VERBOSE,
)


class MiniImpSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class MiniImpCheckError(Exception):
    """Raised by :func:`parse` when static checks report diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass
class Token:
    kind: str  # int, float, string, ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise MiniImpSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.program = A.Program()

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, message: str, tok: Token = None):
        tok = tok or self.tok
        if tok.kind == "eof":
            message = f"{message} (unexpected end of input)"
        raise MiniImpSyntaxError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def nid(self) -> int:
        return self.program.fresh_id()

    # -- top level
    def parse_program(self) -> A.Program:
        while self.tok.kind != "eof":
            if self.at("global"):
                self.program.globals.append(self.parse_global())
            elif self.at("fn"):
                self.program.functions.append(self.parse_function())
            else:
                self.error(f"expected 'global' or 'fn', found {self.tok.text!r}")
        return self.program

    def at_type(self) -> bool:
        return self.tok.kind == "kw" and self.tok.text in A.SCALAR_TYPES

    def parse_type(self, allow_array: bool = True) -> str:
        if not self.at_type():
            self.error(f"expected type, found {self.tok.text or 'end of input'!r}")
        base = self.advance().text
        if allow_array and self.at("[") and self.tokens[self.pos + 1].text == "]":
            self.advance()
            self.advance()
            return base + "[]"
        return base

    def parse_global(self) -> A.GlobalDecl:
        start = self.expect("global")
        base = self.parse_type(allow_array=False)
        if self.at("["):
            self.advance()
            if self.tok.kind != "int":
                self.error("expected array size")
            size = int(self.advance().text)
            self.expect("]")
            name = self.expect_ident().text
            self.expect(";")
            return A.GlobalDecl(self.nid(), start.line, start.col, base + "[]", name,
                                size=size, site=self.program.fresh_site())
        name = self.expect_ident().text
        init = None
        if self.at("="):
            self.advance()
            init = self.parse_literal()
        self.expect(";")
        return A.GlobalDecl(self.nid(), start.line, start.col, base, name, init)

    def parse_literal(self):
        t = self.tok
        neg = False
        if self.at("-"):
            neg = True
            self.advance()
            t = self.tok
        if t.kind == "int":
            self.advance()
            v = int(t.text)
            return A.IntLit(self.nid(), t.line, t.col, -v if neg else v)
        if t.kind == "float":
            self.advance()
            v = float(t.text)
            return A.FloatLit(self.nid(), t.line, t.col, -v if neg else v)
        if not neg and t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return A.BoolLit(self.nid(), t.line, t.col, t.text == "true")
        self.error("expected literal initializer")

    def parse_function(self) -> A.FunctionDef:
        start = self.expect("fn")
        name = self.expect_ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                ptype = self.parse_type()
                params.append(A.Param(ptype, self.expect_ident().text))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        ret = "void"
        if self.at("->"):
            self.advance()
            ret = self.parse_type()
        fid = self.nid()
        body = self.parse_block()
        return A.FunctionDef(fid, start.line, start.col, name, params, ret, body)

    def parse_block(self) -> list:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.parse_stmt())
        self.advance()
        return stmts

    # -- statements
    def parse_stmt(self):
        t = self.tok
        line, col = t.line, t.col
        if self.at_type():
            vtype = self.parse_type()
            name = self.expect_ident().text
            init = None
            if self.at("="):
                self.advance()
                init = self.parse_expr()
            self.expect(";")
            return A.VarDecl(self.nid(), line, col, vtype, name, init)
        if self.at("if"):
            return self.parse_if()
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            sid = self.nid()
            return A.While(sid, line, col, cond, self.parse_block())
        if self.at("for"):
            self.advance()
            var = self.expect_ident().text
            self.expect("in")
            lo = self.parse_expr()
            self.expect("..")
            hi = self.parse_expr()
            sid = self.nid()
            return A.For(sid, line, col, var, lo, hi, self.parse_block())
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return A.Return(self.nid(), line, col, value)
        if t.kind == "kw" and t.text in ("print", "work", "fail"):
            self.advance()
            self.expect("(")
            value = self.parse_expr()
            self.expect(")")
            self.expect(";")
            cls = {"print": A.Print, "work": A.Work, "fail": A.Fail}[t.text]
            return cls(self.nid(), line, col, value)
        if self.at("try"):
            self.advance()
            sid = self.nid()
            body = self.parse_block()
            self.expect("rescue")
            return A.Try(sid, line, col, body, self.parse_block())
        if self.at("probe"):
            self.advance()
            if self.tok.kind != "string":
                self.error("expected probe label string")
            label = self.advance().text[1:-1]
            sid = self.nid()
            return A.Probe(sid, line, col, label, self.parse_block())
        if t.kind == "ident":
            name = self.advance().text
            if self.at("("):
                call = self.parse_call_rest(name, t)
                self.expect(";")
                if not isinstance(call, A.Call):
                    self.error(f"builtin {name} cannot be used as a statement", t)
                return A.ExprStmt(self.nid(), line, col, call)
            index = None
            if self.at("["):
                self.advance()
                index = self.parse_expr()
                self.expect("]")
            self.expect("=")
            value = self.parse_expr()
            self.expect(";")
            return A.Assign(self.nid(), line, col, name, index, value)
        self.error(f"unexpected {t.text or 'end of input'!r}")

    def parse_if(self) -> A.If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        sid = self.nid()
        then = self.parse_block()
        orelse = None
        if self.at("else"):
            self.advance()
            orelse = [self.parse_if()] if self.at("if") else self.parse_block()
        return A.If(sid, t.line, t.col, cond, then, orelse)

    # -- expressions
    def parse_expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance()
            right = self.parse_expr(level + 1)
            left = A.Binary(self.nid(), op.line, op.col, op.text, left, right)
        return left

    def parse_unary(self):
        if self.at("-") or self.at("!"):
            op = self.advance()
            operand = self.parse_unary()
            return A.Unary(self.nid(), op.line, op.col, op.text, operand)
        return self.parse_postfix()

    def parse_postfix(self):
        e = self.parse_primary()
        while self.at("["):
            t = self.advance()
            idx = self.parse_expr()
            self.expect("]")
            e = A.Index(self.nid(), t.line, t.col, e, idx)
        return e

    def parse_call_rest(self, name: str, t: Token):
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        if name in BUILTINS:
            if len(args) != BUILTINS[name]:
                self.error(f"builtin {name} expects {BUILTINS[name]} argument(s)", t)
            return A.Builtin(self.nid(), t.line, t.col, name, args)
        return A.Call(self.nid(), t.line, t.col, name, args)

    def parse_primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.IntLit(self.nid(), t.line, t.col, int(t.text))
        if t.kind == "float":
            self.advance()
            return A.FloatLit(self.nid(), t.line, t.col, float(t.text))
        if self.at("true") or self.at("false"):
            self.advance()
            return A.BoolLit(self.nid(), t.line, t.col, t.text == "true")
        if self.at("new"):
            self.advance()
            base = self.parse_type(allow_array=False)
            self.expect("[")
            size = self.parse_expr()
            self.expect("]")
            return A.NewArray(self.nid(), t.line, t.col, base, size, self.program.fresh_site())
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return self.parse_call_rest(t.text, t)
            return A.Var(self.nid(), t.line, t.col, t.text)
        self.error(f"unexpected {t.text or 'end of input'!r} in expression")


def parse(source: str, check: bool = True) -> A.Program:
    """Parse MiniImp source; with ``check`` the static checks must pass too."""
    program = Parser(source).parse_program()
    if check:
        from .checker import check as run_check

        diags = run_check(program)
        if diags:
            raise MiniImpCheckError(diags)
    return program
