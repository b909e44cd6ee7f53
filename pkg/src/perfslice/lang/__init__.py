"""MiniImp: a small deterministic imperative language with a cost model."""
from .ast import Program
from .checker import Diagnostic, check
from .interp import (CostConfig, InputRecord, Interpreter, MiniImpRuntimeError,
                     RunResult, interpret)
from .parser import MiniImpCheckError, MiniImpSyntaxError, parse
from .printer import format_expr, format_program

__all__ = [
    "Program", "Diagnostic", "check", "CostConfig", "InputRecord", "Interpreter",
    "MiniImpRuntimeError", "RunResult", "interpret", "MiniImpCheckError",
    "MiniImpSyntaxError", "parse", "format_expr", "format_program",
]
