"""Online stage: instantiate, reduce, eigensolve, recover, filter.

The template fixes everything structural offline; this module only fills
in numbers. If a recorded pivot is numerically unsafe for a particular
instance the reduction is abandoned and the unreduced pencil is solved
instead, trading speed for correctness.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .errors import InstanceError
from .numeric import FINITE, gep_solve
from .pencil import apply_ops
from .poly import CoeffSlot, coefficient_norms, evaluate
from .template import SolverTemplate


@dataclass(frozen=True)
class SolveOptions:
    keep_all: bool = False
    no_reduce: bool = False
    residual_tol: float = 1e-6
    consistency_tol: float = 1e-4
    ratio_tol: float = 1e-12
    pivot_tol: float = 1e-12
    inf_tol: float = 1e-10
    realify_tol: Optional[float] = None


@dataclass(frozen=True)
class Solution:
    point: Tuple[complex, ...]
    residuals: np.ndarray
    eigenvalue: complex
    consistency: float
    valid: bool
    indeterminate: bool
    reduced_path: bool

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))


def parse_instance(text: str, template: SolverTemplate) -> Dict[CoeffSlot, float]:
    """Read `slot = value` lines into a complete coefficient instance."""
    by_name = template.slot_by_name()
    values: Dict[CoeffSlot, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rhs = line.partition("=")
        if not sep:
            raise InstanceError(f"line {lineno}: expected 'slot = value', got {raw!r}")
        name = name.strip()
        if name not in by_name:
            raise InstanceError(f"line {lineno}: unknown slot {name!r}")
        slot = by_name[name]
        if slot in values:
            raise InstanceError(f"line {lineno}: slot {name!r} assigned twice")
        try:
            values[slot] = float(rhs.strip())
        except ValueError:
            raise InstanceError(f"line {lineno}: bad value {rhs.strip()!r}") from None
    missing = [s.name for s in template.slots if s not in values]
    if missing:
        raise InstanceError(f"missing slot values: {', '.join(sorted(missing))}")
    return values


def check_instance(template: SolverTemplate, instance: Mapping[CoeffSlot, float]) -> None:
    missing = [s.name for s in template.slots if s not in instance]
    if missing:
        raise InstanceError(f"missing slot values: {', '.join(sorted(missing))}")
    bad = [s.name for s in template.slots if not math.isfinite(instance[s])]
    if bad:
        raise InstanceError(f"non-finite slot values: {', '.join(sorted(bad))}")


def instantiate(template: SolverTemplate, instance: Mapping[CoeffSlot, float]
                ) -> Tuple[np.ndarray, np.ndarray]:
    """Numeric companion pencil (A, B); structural zeros stay exactly 0.0."""
    check_instance(template, instance)
    b = len(template.basis)
    l = template.hidden_degree
    k = l * b
    A = np.zeros((k, k))
    B = np.zeros((k, k))
    for e in range(l - 1):
        for j in range(b):
            A[e * b + j, (e + 1) * b + j] = 1.0
            B[e * b + j, e * b + j] = 1.0
    for (r, c, e), slot in template.placement.items():
        value = instance[slot]
        if e == l:
            B[(l - 1) * b + r, (l - 1) * b + c] = value
        else:
            A[(l - 1) * b + r, e * b + c] = -value
    return A, B


def apply_schedule(A: np.ndarray, B: np.ndarray, schedule, pivot_tol: float = 1e-12
                   ) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Replay the recorded row operations; None signals fallback."""
    return apply_ops(A, B, schedule, pivot_tol)


def solve(template: SolverTemplate, instance: Mapping[CoeffSlot, float],
          options: SolveOptions = SolveOptions()) -> List[Solution]:
    """All solutions of the instantiated system, sorted by residual."""
    A, B = instantiate(template, instance)
    reduced = None
    if not options.no_reduce and template.schedule is not None and template.schedule.ops:
        reduced = apply_schedule(A, B, template.schedule, options.pivot_tol)
    if reduced is not None:
        solve_A, solve_B = reduced
        col_pos = {c: i for i, c in enumerate(template.schedule.surviving_cols)}
        reduced_path = True
    else:
        solve_A, solve_B = A, B
        col_pos = {c: c for c in range(template.pencil_size)}
        reduced_path = False

    pairs = gep_solve(solve_A, solve_B, inf_tol=options.inf_tol)
    system = template.system()
    norms = coefficient_norms(system, instance)
    scale = np.maximum(norms, 1e-30)

    solutions = []
    for pair in pairs:
        if pair.classification != FINITE:
            continue
        lam = pair.value
        v = pair.vector
        vnorm = float(np.linalg.norm(v))
        point: List[complex] = [0j] * len(template.variables)
        point[template.hidden_index] = lam
        indeterminate = False
        consistency = 0.0
        for var in template.base_variables:
            estimates = []
            for num_col, den_col in template.recovery[var]:
                den = v[col_pos[den_col]]
                if abs(den) >= options.ratio_tol * vnorm:
                    estimates.append(v[col_pos[num_col]] / den)
            if not estimates:
                indeterminate = True
                num_col, den_col = template.recovery[var][0]
                den = v[col_pos[den_col]]
                estimates = [v[col_pos[num_col]] / den if den != 0 else complex("nan")]
            primary = estimates[0]
            point[template.variables.index(var)] = primary
            for extra in estimates[1:]:
                consistency = max(consistency, abs(extra - primary) / max(1.0, abs(primary)))
        point_t = tuple(point)
        if options.realify_tol is not None and all(
                abs(z.imag) <= options.realify_tol * max(1.0, abs(z)) for z in point_t):
            point_t = tuple(complex(z.real) for z in point_t)
        if all(math.isfinite(z.real) and math.isfinite(z.imag) for z in point_t):
            residuals = evaluate(system, instance, point_t)
        else:
            residuals = np.full(system.m, np.inf)
        valid = (not indeterminate
                 and bool(np.all(residuals <= options.residual_tol * scale))
                 and consistency <= options.consistency_tol)
        solutions.append(Solution(point=point_t, residuals=residuals, eigenvalue=lam,
                                  consistency=consistency, valid=valid,
                                  indeterminate=indeterminate, reduced_path=reduced_path))
    solutions.sort(key=lambda s: (s.max_residual if math.isfinite(s.max_residual) else math.inf))
    if options.keep_all:
        return solutions
    return [s for s in solutions if s.valid]
