"""Static slicing of MiniImp programs into feature evaluators."""
from __future__ import annotations

from ..lang import ast as A
from .cost import CostReport, SliceUnsound, baseline_runs, slice_cost
from .emit import EmitInfo, SliceError, emit_slice, manifest
from .graph import AbstractLocation, ProcedureDependenceGraph
from .pdg import build_pdg
from .reach import (CriterionError, SliceCriterion, executable_closure,
                    two_pass_reachable)
from .sdg import SystemDependenceGraph, build_sdg
from .summary import add_summary_edges


def prepare(program: A.Program) -> SystemDependenceGraph:
    """SDG with summary edges, ready for any number of criteria."""
    return add_summary_edges(build_sdg(program))


def slice_program(program: A.Program, variable: str, sdg: SystemDependenceGraph = None,
                  info_out: list = None) -> A.Program:
    """Evaluator for global ``variable`` at the exit of the entry function."""
    sdg = sdg if sdg is not None else prepare(program)
    crit = SliceCriterion(variable, program.entry)
    verts = executable_closure(sdg, two_pass_reachable(sdg, crit))
    return emit_slice(program, verts, crit, sdg, info_out)


__all__ = [
    "AbstractLocation", "CostReport", "CriterionError", "EmitInfo", "ProcedureDependenceGraph",
    "SliceCriterion", "SliceError", "SliceUnsound", "SystemDependenceGraph",
    "add_summary_edges", "baseline_runs", "build_pdg", "build_sdg", "emit_slice", "executable_closure",
    "manifest", "prepare", "slice_cost", "slice_program", "two_pass_reachable",
]
