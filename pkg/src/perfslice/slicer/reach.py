"""Backward two-pass reachability over the SDG."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .graph import CALL, LINK_IN, LINK_OUT

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SliceCriterion:
    """Value of global ``variable`` at the exit of ``function``."""

    variable: str
    function: str = "main"


class CriterionError(ValueError):
    pass


def criterion_vertex(sdg, criterion: SliceCriterion):
    """Formal-out vertex for the criterion, or None when it is never written."""
    if sdg.program.global_decl(criterion.variable) is None:
        raise CriterionError(f"{criterion.variable} is not a global of the program")
    if criterion.function not in sdg.pdgs:
        raise CriterionError(f"no function named {criterion.function}")
    return sdg.formal_out(criterion.function, ("global", criterion.variable))


def _closure(sdg, seeds, skip) -> set:
    seen = set(seeds)
    stack = list(seeds)
    pred = sdg.pred
    while stack:
        v = stack.pop()
        for u, kind in pred[v]:
            if kind not in skip and u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def reach_from(sdg, seeds) -> set:
    first = _closure(sdg, seeds, (LINK_OUT,))
    outs = [v for v in first if sdg.vertices[v].kind == "actual-out"]
    # pass 2 descends into callees through linkage-exit edges; it never climbs
    # back out to callers, so the result stays context sensitive
    second = _closure(sdg, outs, (LINK_IN, CALL))
    return first | second


def two_pass_reachable(sdg, criterion: SliceCriterion) -> set:
    if not sdg.summary_done:
        raise ValueError("summary edges must be installed first")
    start = criterion_vertex(sdg, criterion)
    if start is None:
        log.warning("%s is never written in %s; the slice keeps only its declaration",
                    criterion.variable, criterion.function)
        return set()
    return reach_from(sdg, [start])


def executable_closure(sdg, vertices: set) -> set:
    """Grow a slice until every kept call site feeds what its callee reads.

    A callee statement kept for one call site also runs at every other kept
    call site of that callee; without the matching actual-ins it would run on
    default arguments and could fault.
    """
    result = set(vertices)
    while True:
        missing = []
        for site in sdg.call_sites.values():
            if site.vertex not in result:
                continue
            formals = sdg.pdgs[site.callee].formal_in
            for port, fin in formals.items():
                ain = site.actual_in[port]
                if fin in result and ain not in result:
                    missing.append(ain)
        if not missing:
            return result
        result |= reach_from(sdg, missing)
