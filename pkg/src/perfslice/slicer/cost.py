"""Measure what an evaluator costs relative to the program it came from."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang import ast as A
from ..lang.interp import MiniImpRuntimeError, interpret


class SliceUnsound(AssertionError):
    def __init__(self, message: str, input_name: str = ""):
        super().__init__(message)
        self.input_name = input_name


@dataclass
class CostReport:
    variable: str
    ratios: list = field(default_factory=list)
    original_costs: list = field(default_factory=list)
    slice_costs: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # inputs on which the original faults

    @property
    def mean(self) -> float:
        return sum(self.ratios) / len(self.ratios) if self.ratios else 0.0

    @property
    def max(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def to_dict(self) -> dict:
        return {"variable": self.variable, "meanRatio": self.mean, "maxRatio": self.max,
                "ratios": self.ratios, "originalCosts": self.original_costs,
                "sliceCosts": self.slice_costs, "skipped": self.skipped}


def _ratio(s: int, o: int) -> float:
    if o > 0:
        return s / o
    return 0.0 if s == 0 else float("inf")


def baseline_runs(original: A.Program, inputs) -> list:
    """Run ``original`` once per input; faulting runs become None."""
    out = []
    for rec in inputs:
        try:
            out.append(interpret(original, rec))
        except MiniImpRuntimeError:
            out.append(None)
    return out


def slice_cost(slice_prog: A.Program, original: A.Program, inputs, variable: str,
               baseline: list = None) -> CostReport:
    """Run both programs on each input and compare the criterion's final value.

    ``baseline`` may hold precomputed :func:`baseline_runs` results so the
    original is not re-run for every feature.  Raises :class:`SliceUnsound`
    naming the first input where the values differ or where only the slice
    faults.
    """
    report = CostReport(variable)
    if baseline is None:
        baseline = baseline_runs(original, inputs)
    for k, (rec, orig) in enumerate(zip(inputs, baseline)):
        name = getattr(rec, "name", "") or f"#{k}"
        if orig is None:
            report.skipped.append(name)
            continue
        try:
            sl = interpret(slice_prog, rec)
        except MiniImpRuntimeError as exc:
            raise SliceUnsound(f"slice for {variable} faults on input {name}: {exc}", name) from exc
        if sl.globals[variable] != orig.globals[variable]:
            raise SliceUnsound(f"slice for {variable} computes {sl.globals[variable]!r} on input "
                               f"{name}, original gives {orig.globals[variable]!r}", name)
        report.original_costs.append(orig.cost)
        report.slice_costs.append(sl.cost)
        report.ratios.append(_ratio(sl.cost, orig.cost))
    return report
