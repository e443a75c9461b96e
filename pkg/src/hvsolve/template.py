"""The frozen offline artifact: basis, rows, placement, schedule, recovery.

A template is self-contained: its slot table rebuilds the full input
system, so the online stage needs nothing but the template file and a
coefficient instance. Serialization is canonical (sorted keys, fixed
separators), making identical templates byte-identical on disk.
"""

import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .errors import TemplateError
from .poly import CoeffSlot, ExponentVector, ParamPolynomial, PolySystem, grlex_key, monomial_str
from .pencil import Eliminate, ReductionSchedule, Remove

FORMAT_VERSION = 1

RowSpec = Tuple[int, ExponentVector]  # (poly index, multiplier monomial)


@dataclass(frozen=True)
class SolverTemplate:
    variables: Tuple[str, ...]
    hidden_index: int
    basis: Tuple[ExponentVector, ...]
    rows: Tuple[RowSpec, ...]
    hidden_degree: int
    placement: Mapping[Tuple[int, int, int], CoeffSlot]
    slots: Tuple[CoeffSlot, ...]
    schedule: Optional[ReductionSchedule]
    recovery: Mapping[str, Tuple[Tuple[int, int], ...]]  # var -> (num col, den col) pairs
    pencil_size: int
    reduced_size: int
    provenance: Mapping[str, object] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def hidden_name(self) -> str:
        return self.variables[self.hidden_index]

    @property
    def base_variables(self) -> Tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.variables) if i != self.hidden_index)

    def system(self) -> PolySystem:
        """Rebuild the parametric input system from the slot table."""
        m = max(s.poly_index for s in self.slots) + 1
        terms: List[Dict[ExponentVector, CoeffSlot]] = [{} for _ in range(m)]
        for slot in self.slots:
            terms[slot.poly_index][slot.exponent] = slot
        return PolySystem(variables=self.variables,
                          polys=tuple(ParamPolynomial(t) for t in terms))

    def slot_by_name(self) -> Dict[str, CoeffSlot]:
        return {s.name: s for s in self.slots}

    def describe(self) -> str:
        base = self.base_variables
        lines = [
            f"variables: {' '.join(self.variables)} (hidden: {self.hidden_name})",
            f"basis ({len(self.basis)}): " + " ".join(monomial_str(b, base) for b in self.basis),
            "rows: " + " ".join(f"f{i + 1}*{monomial_str(t, base)}" for i, t in self.rows),
            f"hidden degree l = {self.hidden_degree}",
            f"pencil size k = {self.pencil_size}, reduced k' = {self.reduced_size}",
        ]
        if self.schedule is not None:
            n_elim = sum(isinstance(op, Eliminate) for op in self.schedule.ops)
            n_rem = sum(isinstance(op, Remove) for op in self.schedule.ops)
            lines.append(f"schedule: {n_elim} eliminations + {n_rem} removals")
        for var in base:
            pairs = self.recovery.get(var, ())
            pretty = " ".join(f"v[{a}]/v[{b}]" for a, b in pairs)
            lines.append(f"recovery {var}: {pretty}")
        return "\n".join(lines)


def build_placement(system: PolySystem, hidden_index: int, basis: Tuple[ExponentVector, ...],
                    rows: Tuple[RowSpec, ...]) -> Dict[Tuple[int, int, int], CoeffSlot]:
    """Place every slot of every selected row product into the basis grid."""
    col_of = {mono: c for c, mono in enumerate(basis)}
    h = hidden_index
    placement: Dict[Tuple[int, int, int], CoeffSlot] = {}
    for r, (i, t) in enumerate(rows):
        for exp, slot in system.polys[i].terms.items():
            base = exp[:h] + exp[h + 1:]
            mono = tuple(a + b for a, b in zip(t, base))
            if mono not in col_of:
                raise TemplateError(
                    f"row f{i + 1}*{t} leaves the basis at monomial {mono}")
            placement[(r, col_of[mono], exp[h])] = slot
    return placement


def placement_hidden_degree(placement) -> int:
    return max(e for (_, _, e) in placement)


# ---------------------------------------------------------------------------
# canonical JSON serialization
# ---------------------------------------------------------------------------


def to_json_dict(t: SolverTemplate) -> dict:
    sched = None
    if t.schedule is not None:
        ops = []
        for op in t.schedule.ops:
            if isinstance(op, Eliminate):
                ops.append({"op": "eliminate", "side": op.side, "col": op.col,
                            "pivot": op.pivot_row, "target": op.target_row})
            else:
                ops.append({"op": "remove", "row": op.row, "col": op.col})
        sched = {"size": t.schedule.size, "ops": ops,
                 "surviving_rows": list(t.schedule.surviving_rows),
                 "surviving_cols": list(t.schedule.surviving_cols),
                 "zero_removes": t.schedule.zero_removes}
    return {
        "format_version": t.format_version,
        "variables": list(t.variables),
        "hidden_index": t.hidden_index,
        "basis": [list(b) for b in t.basis],
        "rows": [[i, list(mult)] for i, mult in t.rows],
        "hidden_degree": t.hidden_degree,
        "slots": [{"name": s.name, "poly": s.poly_index, "exponent": list(s.exponent)}
                  for s in sorted(t.slots, key=lambda s: (s.poly_index, grlex_key(s.exponent)))],
        "placement": [[r, c, e, t.placement[(r, c, e)].name]
                      for (r, c, e) in sorted(t.placement)],
        "schedule": sched,
        "recovery": {var: [list(p) for p in pairs] for var, pairs in sorted(t.recovery.items())},
        "pencil_size": t.pencil_size,
        "reduced_size": t.reduced_size,
        "provenance": dict(t.provenance),
    }


def canonical_bytes(t: SolverTemplate) -> bytes:
    return (json.dumps(to_json_dict(t), sort_keys=True, separators=(",", ":")) + "\n").encode()


def save(t: SolverTemplate, path) -> None:
    with open(path, "wb") as fh:
        fh.write(canonical_bytes(t))


def from_json_dict(data: dict) -> SolverTemplate:
    try:
        version = data["format_version"]
        if version != FORMAT_VERSION:
            raise TemplateError(f"unsupported template version {version!r} (expected {FORMAT_VERSION})")
        variables = tuple(data["variables"])
        slots = tuple(CoeffSlot(name=s["name"], poly_index=s["poly"], exponent=tuple(s["exponent"]))
                      for s in data["slots"])
        by_name = {s.name: s for s in slots}
        placement = {(r, c, e): by_name[name] for r, c, e, name in data["placement"]}
        sched = None
        if data["schedule"] is not None:
            ops = []
            for op in data["schedule"]["ops"]:
                if op["op"] == "eliminate":
                    ops.append(Eliminate(side=op["side"], col=op["col"],
                                         pivot_row=op["pivot"], target_row=op["target"]))
                elif op["op"] == "remove":
                    ops.append(Remove(row=op["row"], col=op["col"]))
                else:
                    raise TemplateError(f"unknown schedule op {op['op']!r}")
            sched = ReductionSchedule(size=data["schedule"]["size"], ops=tuple(ops),
                                      surviving_rows=tuple(data["schedule"]["surviving_rows"]),
                                      surviving_cols=tuple(data["schedule"]["surviving_cols"]),
                                      zero_removes=data["schedule"].get("zero_removes", 0))
        template = SolverTemplate(
            variables=variables,
            hidden_index=data["hidden_index"],
            basis=tuple(tuple(b) for b in data["basis"]),
            rows=tuple((i, tuple(mult)) for i, mult in data["rows"]),
            hidden_degree=data["hidden_degree"],
            placement=placement,
            slots=slots,
            schedule=sched,
            recovery={var: tuple(tuple(p) for p in pairs)
                      for var, pairs in data["recovery"].items()},
            pencil_size=data["pencil_size"],
            reduced_size=data["reduced_size"],
            provenance=data.get("provenance", {}),
            format_version=version,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise TemplateError(f"malformed template: {exc!r}") from exc
    _validate(template)
    return template


def load(path) -> SolverTemplate:
    try:
        with open(path, "rb") as fh:
            data = json.loads(fh.read().decode())
    except (OSError, ValueError) as exc:
        raise TemplateError(f"cannot read template: {exc}") from exc
    return from_json_dict(data)


def _validate(t: SolverTemplate) -> None:
    if len(t.rows) != len(t.basis):
        raise TemplateError("template rows count differs from basis size")
    if t.hidden_degree < 1:
        raise TemplateError("hidden degree must be >= 1")
    if t.pencil_size != t.hidden_degree * len(t.basis):
        raise TemplateError("pencil size inconsistent with basis and hidden degree")
    surviving = set(range(t.pencil_size)) if t.schedule is None else set(t.schedule.surviving_cols)
    for var, pairs in t.recovery.items():
        for num, den in pairs:
            if num not in surviving or den not in surviving:
                raise TemplateError(f"recovery pair for {var!r} references a removed pencil column")
    system = t.system()
    expected = build_placement(system, t.hidden_index, t.basis, t.rows)
    if expected != dict(t.placement):
        raise TemplateError("placement map inconsistent with rows and slot table")
