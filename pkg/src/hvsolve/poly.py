"""Parametric polynomial systems with named coefficient slots.

Coefficients never carry numeric values here: every term owns a symbolic
slot (``c1``, ``c2``, ...) and numbers only appear when a solver template
is instantiated at runtime. Exponent vectors are dense tuples of small
non-negative integers.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import ProblemSyntaxError, SystemInvariantError

ExponentVector = Tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def grlex_key(exponent: ExponentVector):
    """Graded-lexicographic sort key (total degree first, then entries)."""
    return (sum(exponent), exponent)


def monomial_str(exponent: ExponentVector, variables: Sequence[str]) -> str:
    parts = []
    for name, e in zip(variables, exponent):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class CoeffSlot:
    """One symbolic coefficient: the slot of monomial ``exponent`` in polynomial ``poly_index``."""

    name: str
    poly_index: int
    exponent: ExponentVector


@dataclass(frozen=True)
class ParamPolynomial:
    """A polynomial whose terms map exponent vectors to coefficient slots."""

    terms: Mapping[ExponentVector, CoeffSlot]

    def __post_init__(self):
        if not self.terms:
            raise SystemInvariantError("polynomial has no terms")

    def support(self) -> Tuple[ExponentVector, ...]:
        return tuple(sorted(self.terms, key=grlex_key))


@dataclass(frozen=True)
class PolySystem:
    """m polynomials in n named variables, m >= n."""

    variables: Tuple[str, ...]
    polys: Tuple[ParamPolynomial, ...]

    def __post_init__(self):
        n, m = len(self.variables), len(self.polys)
        if n == 0:
            raise SystemInvariantError("system declares no variables")
        if m < n:
            raise SystemInvariantError(f"system has {m} polynomials but {n} variables (need m >= n)")
        for v, name in enumerate(self.variables):
            if not any(exp[v] > 0 for p in self.polys for exp in p.terms):
                raise SystemInvariantError(f"variable {name!r} appears in no term")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.polys)

    def slots(self) -> List[CoeffSlot]:
        return [slot for p in self.polys for slot in p.terms.values()]


@dataclass(frozen=True)
class ProjectedSystem:
    """View of a system with one variable moved to the coefficient field.

    Each polynomial becomes a map from (n-1)-dimensional base exponents to
    the list of (hidden_degree, slot) pairs sharing that base monomial.
    ``hidden_degree`` is the overall degree l in the hidden variable.
    """

    hidden_index: int
    base_vars: Tuple[str, ...]
    polys: Tuple[Mapping[ExponentVector, Tuple[Tuple[int, CoeffSlot], ...]], ...]
    hidden_degree: int

    def supports(self) -> List[Tuple[ExponentVector, ...]]:
        return [tuple(sorted(p, key=grlex_key)) for p in self.polys]


def hide_variable(sys: PolySystem, h: int) -> ProjectedSystem:
    """Treat variable ``h`` as a constant, projecting exponents to n-1 dimensions."""
    if not (0 <= h < sys.n):
        raise IndexError(f"hidden index {h} out of range for {sys.n} variables")
    base_vars = tuple(nm for i, nm in enumerate(sys.variables) if i != h)
    projected = []
    l = 0
    for poly in sys.polys:
        bucket: Dict[ExponentVector, List[Tuple[int, CoeffSlot]]] = {}
        for exp, slot in poly.terms.items():
            base = exp[:h] + exp[h + 1:]
            deg = exp[h]
            l = max(l, deg)
            bucket.setdefault(base, []).append((deg, slot))
        projected.append({base: tuple(sorted(pairs)) for base, pairs in sorted(bucket.items(), key=lambda kv: grlex_key(kv[0]))})
    return ProjectedSystem(hidden_index=h, base_vars=base_vars, polys=tuple(projected), hidden_degree=l)


def reassemble_exponent(base: ExponentVector, hidden_degree: int, h: int) -> ExponentVector:
    """Inverse of the projection: splice the hidden degree back at position h."""
    return base[:h] + (hidden_degree,) + base[h:]


def reassemble(proj: ProjectedSystem) -> List[Dict[ExponentVector, CoeffSlot]]:
    """Rebuild the original term maps from a projection (round-trip check)."""
    h = proj.hidden_index
    out = []
    for poly in proj.polys:
        terms = {}
        for base, pairs in poly.items():
            for deg, slot in pairs:
                terms[reassemble_exponent(base, deg, h)] = slot
        out.append(terms)
    return out


def evaluate(sys: PolySystem, slot_values: Mapping[CoeffSlot, float], point: Sequence[complex]) -> np.ndarray:
    """Residual magnitudes |f_i(point)| under the given coefficient values."""
    point = np.asarray(point, dtype=complex)
    if point.shape != (sys.n,):
        raise ValueError(f"point has shape {point.shape}, expected ({sys.n},)")
    out = np.empty(sys.m)
    for i, poly in enumerate(sys.polys):
        acc = 0.0 + 0.0j
        for exp, slot in poly.terms.items():
            try:
                value = slot_values[slot]
            except KeyError:
                raise KeyError(f"no value for slot {slot.name!r}") from None
            acc += value * np.prod(point ** np.asarray(exp))
        out[i] = abs(acc)
    return out


def coefficient_norms(sys: PolySystem, slot_values: Mapping[CoeffSlot, float]) -> np.ndarray:
    """1-norm of each polynomial's coefficient vector (residual scaling)."""
    return np.array([sum(abs(slot_values[s]) for s in p.terms.values()) for p in sys.polys])


# ---------------------------------------------------------------------------
# Problem file grammar
#
#   file       := statement (separator statement)*     separator = newline or ';'
#   statement  := "vars:" name+
#               | ["poly"] id ":" term ("+" term)*
#   term       := slot ("*" factor)*                   factor = var | var "^" int
#
# Variables must be declared before use; exponents of absent variables are 0.
# Slot names must be unique across the whole system.
# ---------------------------------------------------------------------------


def _statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        col = 1
        for piece in line.split(";"):
            if piece.strip():
                yield lineno, col + len(piece) - len(piece.lstrip()), piece.strip()
            col += len(piece) + 1


def _parse_term(term_text: str, variables: Sequence[str], lineno: int, col: int):
    factors = [f.strip() for f in term_text.split("*")]
    if not factors or not factors[0]:
        raise ProblemSyntaxError("empty term", lineno, col)
    slot_name = factors[0]
    if not _IDENT.fullmatch(slot_name):
        raise ProblemSyntaxError(f"bad coefficient slot name {slot_name!r}", lineno, col)
    if slot_name in variables:
        raise ProblemSyntaxError(f"term must start with a coefficient slot, got variable {slot_name!r}", lineno, col)
    exponent = [0] * len(variables)
    for factor in factors[1:]:
        if "^" in factor:
            var, _, power = factor.partition("^")
            var = var.strip()
            try:
                e = int(power)
            except ValueError:
                raise ProblemSyntaxError(f"bad exponent {power!r}", lineno, col) from None
            if e < 0:
                raise ProblemSyntaxError(f"negative exponent in {factor!r}", lineno, col)
        else:
            var, e = factor.strip(), 1
        if var not in variables:
            raise ProblemSyntaxError(f"unknown variable {var!r}", lineno, col)
        exponent[variables.index(var)] += e
    return slot_name, tuple(exponent)


def parse_system(text: str) -> PolySystem:
    """Parse problem-file text into a PolySystem."""
    variables: Tuple[str, ...] = ()
    seen_vars = False
    poly_terms: List[Dict[ExponentVector, Tuple[str, int, int]]] = []
    seen_slots: Dict[str, Tuple[int, int]] = {}

    for lineno, col, stmt in _statements(text):
        head, sep, body = stmt.partition(":")
        if not sep:
            raise ProblemSyntaxError(f"expected ':' in statement {stmt!r}", lineno, col)
        head = head.strip()
        if head == "vars":
            if seen_vars:
                raise ProblemSyntaxError("duplicate vars header", lineno, col)
            names = body.split()
            if not names:
                raise ProblemSyntaxError("vars header declares no variables", lineno, col)
            for nm in names:
                if not _IDENT.fullmatch(nm):
                    raise ProblemSyntaxError(f"bad variable name {nm!r}", lineno, col)
            if len(set(names)) != len(names):
                raise ProblemSyntaxError("duplicate variable name", lineno, col)
            variables = tuple(names)
            seen_vars = True
            continue
        if head == "poly" or head.startswith("poly "):
            head = head[4:].strip()
        if not head:
            raise ProblemSyntaxError("missing polynomial id", lineno, col)
        if not seen_vars:
            raise ProblemSyntaxError("polynomial appears before vars header", lineno, col)
        terms: Dict[ExponentVector, Tuple[str, int, int]] = {}
        for term_text in body.split("+"):
            slot_name, exponent = _parse_term(term_text, variables, lineno, col)
            if slot_name in seen_slots:
                raise ProblemSyntaxError(f"duplicate slot name {slot_name!r}", lineno, col)
            if exponent in terms:
                raise ProblemSyntaxError(
                    f"duplicate monomial {monomial_str(exponent, variables)} in polynomial {head!r}", lineno, col)
            seen_slots[slot_name] = (lineno, col)
            terms[exponent] = (slot_name, lineno, col)
        if not terms:
            raise ProblemSyntaxError(f"polynomial {head!r} has no terms", lineno, col)
        poly_terms.append(terms)

    if not seen_vars:
        raise ProblemSyntaxError("missing vars header", 1, 1)
    if not poly_terms:
        raise ProblemSyntaxError("no polynomials declared", 1, 1)

    polys = tuple(
        ParamPolynomial({exp: CoeffSlot(name=info[0], poly_index=i, exponent=exp)
                         for exp, info in terms.items()})
        for i, terms in enumerate(poly_terms))
    try:
        return PolySystem(variables=variables, polys=polys)
    except SystemInvariantError as exc:
        raise ProblemSyntaxError(str(exc), 1, 1) from exc


def format_system(sys: PolySystem) -> str:
    """Canonical problem-file text; parse_system round-trips it."""
    lines = ["vars: " + " ".join(sys.variables)]
    for i, poly in enumerate(sys.polys, start=1):
        terms = []
        for exp in sorted(poly.terms, key=grlex_key):
            slot = poly.terms[exp]
            mono = monomial_str(exp, sys.variables)
            terms.append(slot.name if mono == "1" else f"{slot.name}*{mono}")
        lines.append(f"poly {i}: " + " + ".join(terms))
    return "\n".join(lines) + "\n"
