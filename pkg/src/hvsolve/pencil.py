"""Matrix pencils over symbolic coefficient slots.

The resultant matrix M'(x) = M_0 + M_1 x + ... + M_l x^l is linearized in
first companion form: A carries identity blocks on the superdiagonal and
[-M_0 ... -M_{l-1}] in the last block row, B = blockdiag(I, ..., I, M_l).
With that convention the structurally-zero columns of B sit exactly where
M_l has zero columns.

The reduction schedule is computed on slot patterns only: an entry is a
structural zero when it is zero for every coefficient instance. Numeric
zeros of special instances are ignored offline; the runtime guards them
with a pivot threshold and falls back to the unreduced pencil.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateMatrixError
from .numeric import INF_BAND, ZERO_BAND
from .poly import CoeffSlot


@dataclass(frozen=True)
class SlotRef:
    """A coefficient slot scaled by a sign (companion rows carry -M_e)."""

    slot: CoeffSlot
    scale: int = 1


Entry = Union[Fraction, SlotRef]


@dataclass(frozen=True)
class SymbolicMatrix:
    shape: Tuple[int, int]
    entries: Dict[Tuple[int, int], Entry]

    def instantiate(self, values) -> np.ndarray:
        out = np.zeros(self.shape)
        for (r, c), entry in self.entries.items():
            if isinstance(entry, SlotRef):
                out[r, c] = entry.scale * values[entry.slot]
            else:
                out[r, c] = float(entry)
        return out

    def pattern(self) -> set:
        return {rc for rc, e in self.entries.items()
                if isinstance(e, SlotRef) or e != 0}


@dataclass(frozen=True)
class MatrixPencil:
    """The pair (A, B) of A y = x_h B y, with block layout metadata."""

    A: SymbolicMatrix
    B: SymbolicMatrix
    block_size: int
    blocks: int
    column_labels: Tuple[Tuple[int, Tuple[int, ...]], ...]  # (block, basis monomial)

    @property
    def size(self) -> int:
        return self.block_size * self.blocks

    def slots(self) -> List[CoeffSlot]:
        seen = {}
        for mat in (self.A, self.B):
            for e in mat.entries.values():
                if isinstance(e, SlotRef):
                    seen[e.slot] = None
        return list(seen)

    def instantiate(self, values) -> Tuple[np.ndarray, np.ndarray]:
        return self.A.instantiate(values), self.B.instantiate(values)


@dataclass(frozen=True)
class Eliminate:
    """Row operation target_row += mu * pivot_row on both A and B.

    ``side`` names the matrix whose column ``col`` is structurally zero;
    the multiplier mu = -(opposite[target, col] / opposite[pivot, col]) is
    computed from live values at runtime.
    """

    side: str  # "A" or "B"
    col: int
    pivot_row: int
    target_row: int


@dataclass(frozen=True)
class Remove:
    row: int
    col: int


@dataclass(frozen=True)
class ReductionSchedule:
    size: int
    ops: Tuple[Union[Eliminate, Remove], ...]
    surviving_rows: Tuple[int, ...]
    surviving_cols: Tuple[int, ...]
    zero_removes: int = 0  # removals driven by zero columns of A (0-eigenvalue side)

    @property
    def removed(self) -> int:
        return self.size - len(self.surviving_rows)


def build_pep(template) -> List[SymbolicMatrix]:
    """Coefficient matrices M_0 ... M_l read off the template placement."""
    b = len(template.basis)
    l = template.hidden_degree
    mats: List[Dict[Tuple[int, int], Entry]] = [{} for _ in range(l + 1)]
    for (r, c, e), slot in template.placement.items():
        if not (0 <= r < b and 0 <= c < b and 0 <= e <= l):
            raise DegenerateMatrixError(f"placement entry ({r},{c},{e}) outside {b}x{b} PEP of degree {l}")
        key = (r, c)
        if key in mats[e]:
            raise DegenerateMatrixError(f"duplicate placement at row {r}, column {c}, degree {e}")
        mats[e][key] = SlotRef(slot)
    return [SymbolicMatrix((b, b), m) for m in mats]


def linearize(mats: Sequence[SymbolicMatrix]) -> MatrixPencil:
    """First companion form of the PEP (M_0 + M_1 x + ... + M_l x^l) v = 0."""
    l = len(mats) - 1
    if l < 1:
        raise ValueError("need hidden degree >= 1 to linearize")
    b = mats[0].shape[0]
    k = l * b
    a_entries: Dict[Tuple[int, int], Entry] = {}
    b_entries: Dict[Tuple[int, int], Entry] = {}
    for e in range(l - 1):
        for j in range(b):
            a_entries[(e * b + j, (e + 1) * b + j)] = Fraction(1)
            b_entries[(e * b + j, e * b + j)] = Fraction(1)
    for e in range(l):
        for (r, c), entry in mats[e].entries.items():
            if isinstance(entry, SlotRef):
                negated: Entry = SlotRef(entry.slot, -entry.scale)
            else:
                negated = -entry
            a_entries[((l - 1) * b + r, e * b + c)] = negated
    for (r, c), entry in mats[l].entries.items():
        b_entries[((l - 1) * b + r, (l - 1) * b + c)] = entry
    labels = tuple((e, tuple(mono)) for e in range(l) for mono in _basis_of(mats))
    return MatrixPencil(A=SymbolicMatrix((k, k), a_entries),
                        B=SymbolicMatrix((k, k), b_entries),
                        block_size=b, blocks=l, column_labels=labels)


def _basis_of(mats):
    # linearize is also used on hand-built PEPs in tests where no template
    # basis exists; label columns by index in that case
    b = mats[0].shape[0]
    return [(j,) for j in range(b)]


def linearize_template(template) -> MatrixPencil:
    """Companion pencil with columns labelled by the template's basis monomials."""
    pencil = linearize(build_pep(template))
    labels = tuple((e, tuple(mono)) for e in range(pencil.blocks) for mono in template.basis)
    return MatrixPencil(A=pencil.A, B=pencil.B, block_size=pencil.block_size,
                        blocks=pencil.blocks, column_labels=labels)


def reduce_schedule(pencil: MatrixPencil, protected_cols=frozenset()) -> ReductionSchedule:
    """Greedy structural removal of parasitic 0 and infinity eigenvalues.

    Alternates sides (zero-eigenvalue side A first, then B) until no
    structurally-zero column remains whose opposite column can be thinned
    to a single entry, iterating to a fixpoint so that removals may expose
    further zero columns. Columns in ``protected_cols`` are never removed;
    the generator protects one recovery pair per variable when the
    unconstrained fixpoint would strip every usable eigenvector ratio.
    """
    k = pencil.size
    patterns = {"A": pencil.A.pattern(), "B": pencil.B.pattern()}
    live_rows = set(range(k))
    live_cols = set(range(k))
    ops: List[Union[Eliminate, Remove]] = []
    zero_removes = 0

    def process(side: str) -> bool:
        nonlocal zero_removes
        other = "B" if side == "A" else "A"
        for j in sorted(live_cols):
            if j in protected_cols:
                continue
            if any((r, j) in patterns[side] for r in live_rows):
                continue
            nz = sorted(r for r in live_rows if (r, j) in patterns[other])
            if not nz:
                raise DegenerateMatrixError(
                    f"column {j} structurally zero in both matrices: singular pencil")
            pivot = nz[0]
            for target in nz[1:]:
                ops.append(Eliminate(side=side, col=j, pivot_row=pivot, target_row=target))
                for name in ("A", "B"):
                    pivot_cols = {c for (r, c) in patterns[name] if r == pivot}
                    patterns[name] |= {(target, c) for c in pivot_cols}
                patterns[other].discard((target, j))
            ops.append(Remove(row=pivot, col=j))
            if side == "A":
                zero_removes += 1
            live_rows.discard(pivot)
            live_cols.discard(j)
            return True
        return False

    progress = True
    while progress:
        progress = False
        for side in ("A", "B"):
            while process(side):
                progress = True
    return ReductionSchedule(size=k, ops=tuple(ops),
                             surviving_rows=tuple(sorted(live_rows)),
                             surviving_cols=tuple(sorted(live_cols)),
                             zero_removes=zero_removes)


def apply_ops(A: np.ndarray, B: np.ndarray, schedule: ReductionSchedule,
              pivot_tol: float) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Replay a schedule on numeric matrices; None when a pivot is unsafe.

    Multipliers are computed from live values. A pivot smaller than
    pivot_tol times its column maximum (over rows still alive) signals
    that the structural assumption fails for this instance.
    """
    if A.shape != (schedule.size, schedule.size) or B.shape != A.shape:
        raise ValueError(f"pencil shape {A.shape} does not match schedule size {schedule.size}")
    A = A.astype(float, copy=True)
    B = B.astype(float, copy=True)
    alive = np.ones(schedule.size, dtype=bool)
    for op in schedule.ops:
        if isinstance(op, Eliminate):
            driver = B if op.side == "A" else A
            col = np.abs(driver[alive, op.col])
            col_max = col.max() if col.size else 0.0
            pivot = driver[op.pivot_row, op.col]
            if col_max == 0.0 or abs(pivot) < pivot_tol * col_max:
                return None
            mu = -driver[op.target_row, op.col] / pivot
            A[op.target_row, :] += mu * A[op.pivot_row, :]
            B[op.target_row, :] += mu * B[op.pivot_row, :]
            driver[op.target_row, op.col] = 0.0
        else:
            # removal pivot: the single surviving entry of the opposite-side
            # column (the processed side's column is structurally zero)
            col_a = np.abs(A[alive, op.col]).max() if alive.any() else 0.0
            col_b = np.abs(B[alive, op.col]).max() if alive.any() else 0.0
            pivot = max(abs(A[op.row, op.col]), abs(B[op.row, op.col]))
            col_max = max(col_a, col_b)
            if col_max == 0.0 or pivot < pivot_tol * col_max:
                return None
            alive[op.row] = False
    rows = list(schedule.surviving_rows)
    cols = list(schedule.surviving_cols)
    return A[np.ix_(rows, cols)], B[np.ix_(rows, cols)]


def verify_schedule(pencil: MatrixPencil, schedule: ReductionSchedule, trials: int,
                    seed: int = 0, match_tol: float = 1e-6) -> bool:
    """Check on random instances that the reduction preserves the spectrum.

    A sound schedule satisfies the exact determinant identity

        det(A - x B) = C * x^z * det(A_r - x B_r)

    where z counts the zero-eigenvalue removals and C collects the removal
    pivots: the reduced pencil keeps every non-zero finite eigenvalue with
    multiplicity and sheds z parasitic zeros plus (removed - z) parasitic
    infinities. The identity is tested through log-determinants at random
    sample points, which stays well-posed even when the unreduced pencil
    carries high-multiplicity parasitic eigenvalues that scatter under QZ
    (a direct eigenvalue multiset comparison does not).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng([seed, 0xC0DE])
    slots = pencil.slots()
    for _ in range(trials):
        values = {s: rng.uniform(-1.0, 1.0) for s in slots}
        A, B = pencil.instantiate(values)
        reduced = apply_ops(A, B, schedule, pivot_tol=1e-12)
        if reduced is None:
            return False
        Ar, Br = reduced
        z = schedule.zero_removes
        mags, phases = [], []
        attempts = 0
        while len(mags) < 5 and attempts < 12:
            attempts += 1
            lam = rng.uniform(0.6, 1.5) * np.exp(2j * np.pi * rng.uniform())
            sf, lf = np.linalg.slogdet(A - lam * B)
            sr, lr = np.linalg.slogdet(Ar - lam * Br)
            if sf == 0 or sr == 0:
                continue
            mags.append(lf - lr - z * np.log(abs(lam)))
            phases.append(sf / (sr * (lam / abs(lam)) ** z))
        if len(mags) < 3:
            return False
        scale = max(1.0, abs(mags[0]))
        if max(mags) - min(mags) > match_tol * scale:
            return False
        if any(abs(p - phases[0]) > match_tol * 10 for p in phases[1:]):
            return False
    return True


def band_filter(values, lo: float = ZERO_BAND, hi: float = INF_BAND) -> List[complex]:
    """Drop near-zero and near-infinite eigenvalues before multiset checks."""
    return [v for v in values if lo <= abs(v) <= hi]
