"""Search for the smallest viable monomial basis across hidden variables,
polynomial subsets, and displacement vectors.

The enumeration walks hidden variables starting from the last one (the
conventional choice when a single variable is hidden), then non-empty
polynomial subsets by size, then displacement sign patterns in
lexicographic order. Acceptance requires every polynomial to contribute
at least one multiplier, enough rows to cover the basis, a numeric rank
gate at random coefficients, a full-rank square row selection, a verified
parasitic-eigenvalue reduction schedule, and surviving recovery pairs for
every non-hidden variable.
"""

import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import Config
from .errors import GenerationError
from .numeric import numeric_rank
from .pencil import linearize_template, reduce_schedule, verify_schedule
from .poly import ExponentVector, PolySystem, ProjectedSystem, grlex_key, hide_variable
from .polytope import Displacement, lattice_points, minkowski_sum, newton_polytope
from .template import SolverTemplate, build_placement, placement_hidden_degree

MAX_FREE_SUBSET_POLYS = 12


@dataclass(frozen=True)
class BasisCandidate:
    """One (hidden variable, subset, displacement) pick with its basis and
    the multiplier sets of all m polynomials."""

    hidden_index: int
    subset: Tuple[int, ...]
    delta_signs: Tuple[int, ...]
    epsilon: Fraction
    basis: Tuple[ExponentVector, ...]
    multipliers: Tuple[Tuple[ExponentVector, ...], ...]
    enum_index: int = 0

    @property
    def total_rows(self) -> int:
        return sum(len(t) for t in self.multipliers)

    def row_list(self) -> List[Tuple[int, ExponentVector]]:
        return [(i, t) for i, ts in enumerate(self.multipliers) for t in ts]

    def describe(self, variables: Sequence[str]) -> str:
        subset = "{" + ",".join(f"f{i + 1}" for i in self.subset) + "}"
        return (f"hidden={variables[self.hidden_index]} J={subset} "
                f"delta={self.delta_signs} |B|={len(self.basis)}")


@dataclass(frozen=True)
class EnumRecord:
    candidate: Optional[BasisCandidate]
    description: str
    reason: Optional[str]  # None means accepted


def multiplier_set(support: Sequence[ExponentVector], basis: Sequence[ExponentVector]) -> Tuple[ExponentVector, ...]:
    """All non-negative monomials t with t + support contained in the basis."""
    bset = set(basis)
    s0 = support[0]
    out = []
    for b in bset:
        t = tuple(bi - si for bi, si in zip(b, s0))
        if any(v < 0 for v in t):
            continue
        if all(tuple(ti + si for ti, si in zip(t, s)) in bset for s in support):
            out.append(t)
    return tuple(sorted(set(out), key=grlex_key))


def _hide_order(n: int) -> List[int]:
    return list(range(n - 1, -1, -1))


def _enumerate(system: PolySystem, config: Config) -> Iterator[EnumRecord]:
    n, m = system.n, system.m
    max_size = config.max_subset_size or m
    if config.max_subset_size is None and m > MAX_FREE_SUBSET_POLYS:
        raise GenerationError(
            f"{m} polynomials would enumerate 2^{m}-1 subsets; set max_subset_size")
    hide = _hide_order(n)
    if config.forced_hidden is not None:
        if config.forced_hidden not in system.variables:
            raise GenerationError(f"unknown hidden variable {config.forced_hidden!r}")
        hide = [system.variables.index(config.forced_hidden)]

    enum_index = 0
    for h in hide:
        proj = hide_variable(system, h)
        supports = proj.supports()
        polytopes = [newton_polytope(s) for s in supports]
        d = n - 1
        for size in range(1, max_size + 1):
            for subset in combinations(range(m), size):
                q = polytopes[subset[0]]
                for i in subset[1:]:
                    q = minkowski_sum(q, polytopes[i])
                for signs in product((-1, 0, 1), repeat=d):
                    desc = (f"hidden={system.variables[h]} "
                            f"J={{{','.join(f'f{i + 1}' for i in subset)}}} delta={signs}")
                    disp = Displacement.from_signs(signs, config.epsilon)
                    basis_set = lattice_points(q, disp)
                    if any(s != 0 for s in signs):
                        half = lattice_points(q, Displacement.from_signs(signs, config.epsilon / 2))
                        if half != basis_set:
                            warnings.warn(
                                f"{desc}: basis depends on epsilon "
                                f"({config.epsilon} vs {config.epsilon / 2}); using epsilon")
                    idx = enum_index
                    enum_index += 1
                    if not basis_set:
                        yield EnumRecord(None, desc, "empty basis")
                        continue
                    basis = tuple(sorted(basis_set, key=grlex_key))
                    mults = tuple(multiplier_set(supports[i], basis) for i in range(m))
                    cand = BasisCandidate(hidden_index=h, subset=subset, delta_signs=signs,
                                          epsilon=config.epsilon, basis=basis,
                                          multipliers=mults, enum_index=idx)
                    empty = [i for i, t in enumerate(mults) if not t]
                    if empty:
                        yield EnumRecord(cand, desc,
                                         f"f{empty[0] + 1} contributes no multiplier")
                        continue
                    if cand.total_rows < len(basis):
                        yield EnumRecord(cand, desc,
                                         f"only {cand.total_rows} rows for {len(basis)} basis monomials")
                        continue
                    yield EnumRecord(cand, desc, None)


def enumerate_candidates(system: PolySystem, config: Config = Config(),
                         with_rejections: bool = False):
    """Stream accepted candidates; with_rejections yields every EnumRecord."""
    if system.n < 2:
        raise GenerationError(
            "hiding a variable leaves 0 base variables; "
            "solve the univariate polynomial directly with a root finder")
    records = _enumerate(system, config)
    if with_rejections:
        yield from records
    else:
        for rec in records:
            if rec.reason is None:
                yield rec.candidate


def candidate_invariants(system: PolySystem, cand: BasisCandidate) -> Optional[str]:
    """Reason string when a (possibly hand-built) candidate breaks the rules."""
    proj = hide_variable(system, cand.hidden_index)
    supports = proj.supports()
    if len(cand.multipliers) != system.m:
        return "multiplier sets do not cover every polynomial"
    bset = set(cand.basis)
    for i, ts in enumerate(cand.multipliers):
        if not ts:
            return f"f{i + 1} contributes no multiplier"
        for t in ts:
            for s in supports[i]:
                if tuple(a + b for a, b in zip(t, s)) not in bset:
                    return f"row f{i + 1}*{t} leaves the basis"
    if cand.total_rows < len(cand.basis):
        return "fewer rows than basis monomials"
    return None


def _stacked_matrix(proj: ProjectedSystem, basis: Sequence[ExponentVector],
                    rows: Sequence[Tuple[int, ExponentVector]], values, x: float) -> np.ndarray:
    col = {mono: c for c, mono in enumerate(basis)}
    M = np.zeros((len(rows), len(basis)))
    for r, (i, t) in enumerate(rows):
        for base, pairs in proj.polys[i].items():
            c = col[tuple(a + b for a, b in zip(t, base))]
            M[r, c] += sum(values[slot] * x ** deg for deg, slot in pairs)
    return M


def _random_values(system: PolySystem, rng) -> dict:
    return {slot: rng.uniform(-1.0, 1.0) for slot in system.slots()}


def rank_test(system: PolySystem, cand: BasisCandidate, trials: int,
              rank_tol: float = 1e-8, seed: int = 0) -> bool:
    """True when the stacked matrix has full column rank at random
    coefficients and random hidden-variable points, in every trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    proj = hide_variable(system, cand.hidden_index)
    rows = cand.row_list()
    rng = np.random.default_rng([seed, 1, cand.enum_index])
    b = len(cand.basis)
    for _ in range(trials):
        M = _stacked_matrix(proj, cand.basis, rows, _random_values(system, rng),
                            rng.uniform(-1.0, 1.0))
        if numeric_rank(M, rank_tol) != b:
            return False
    return True


def select_rows(system: PolySystem, cand: BasisCandidate, config: Config = Config()
                ) -> Optional[Tuple[Tuple[int, ExponentVector], ...]]:
    """Pick |B| rows forming a generically full-rank square matrix.

    Pivoted QR on the transposed stacked matrix orders rows by pivot
    magnitude; the selection is kept in enumeration order and re-verified
    on 3 independent random draws before acceptance.
    """
    proj = hide_variable(system, cand.hidden_index)
    rows = cand.row_list()
    b = len(cand.basis)
    rng = np.random.default_rng([config.seed, 2, cand.enum_index])
    for _ in range(5):
        M = _stacked_matrix(proj, cand.basis, rows, _random_values(system, rng),
                            rng.uniform(-1.0, 1.0))
        _, _, piv = scipy.linalg.qr(M.T, pivoting=True)
        chosen = sorted(piv[:b])
        selected = tuple(rows[j] for j in chosen)
        ok = all(
            numeric_rank(
                _stacked_matrix(proj, cand.basis, selected, _random_values(system, rng),
                                rng.uniform(-1.0, 1.0)),
                config.rank_tol) == b
            for _ in range(3))
        if ok:
            return selected
    return None


def _recovery_pairs(basis, hidden_index, n_vars, blocks, surviving_cols
                    ) -> Optional[Dict[int, Tuple[Tuple[int, int], ...]]]:
    """Surviving same-block column pairs whose monomials differ by one
    unit of each base variable; None when some variable has no pair."""
    b = len(basis)
    col_of = {mono: c for c, mono in enumerate(basis)}
    surviving = set(surviving_cols)
    out: Dict[int, Tuple[Tuple[int, int], ...]] = {}
    base_positions = [v for v in range(n_vars) if v != hidden_index]
    for pos, var in enumerate(base_positions):
        ranked = []
        for e in range(blocks):
            for den_mono, den_c in col_of.items():
                num_mono = tuple(x + (1 if i == pos else 0) for i, x in enumerate(den_mono))
                num_c = col_of.get(num_mono)
                if num_c is None:
                    continue
                num_col, den_col = e * b + num_c, e * b + den_c
                if num_col in surviving and den_col in surviving:
                    ranked.append((sum(den_mono), e, den_col, num_col))
        if not ranked:
            return None
        ranked.sort()
        out[var] = tuple((num, den) for _, _, den, num in ranked[:4])
    return out


def build_template(system: PolySystem, cand: BasisCandidate,
                   config: Config = Config()) -> Tuple[Optional[SolverTemplate], Optional[str]]:
    """Run a candidate through every acceptance gate; (template, None) on
    success, (None, reason) otherwise."""
    reason = candidate_invariants(system, cand)
    if reason is not None:
        return None, reason
    if not rank_test(system, cand, trials=5, rank_tol=config.rank_tol, seed=config.seed):
        return None, "resultant matrix is rank deficient at random coefficients"
    rows = select_rows(system, cand, config)
    if rows is None:
        return None, "no full-rank square row subset found"
    placement = build_placement(system, cand.hidden_index, cand.basis, rows)
    l = placement_hidden_degree(placement)
    if l < 1:
        return None, "hidden variable does not appear in the selected rows"
    provisional = SolverTemplate(
        variables=system.variables, hidden_index=cand.hidden_index,
        basis=cand.basis, rows=rows, hidden_degree=l, placement=placement,
        slots=tuple(system.slots()), schedule=None, recovery={},
        pencil_size=l * len(cand.basis), reduced_size=l * len(cand.basis),
        provenance={})
    pencil = linearize_template(provisional)
    schedule = reduce_schedule(pencil)
    recovery = _recovery_pairs(cand.basis, cand.hidden_index, system.n,
                               pencil.blocks, schedule.surviving_cols)
    if recovery is None:
        # the unconstrained fixpoint stripped every usable ratio; keep the
        # preferred pair of each variable alive and reduce around it
        full = _recovery_pairs(cand.basis, cand.hidden_index, system.n,
                               pencil.blocks, range(pencil.size))
        if full is None:
            return None, "a base variable has no unit-difference column pair"
        protected = frozenset(c for pairs in full.values() for c in pairs[0])
        schedule = reduce_schedule(pencil, protected_cols=protected)
        recovery = _recovery_pairs(cand.basis, cand.hidden_index, system.n,
                                   pencil.blocks, schedule.surviving_cols)
        if recovery is None:
            return None, "a base variable has no surviving recovery pair"
    if schedule.ops and not verify_schedule(pencil, schedule, trials=3, seed=config.seed):
        return None, "reduction schedule failed spectrum verification"
    template = replace(
        provisional,
        schedule=schedule,
        recovery={system.variables[v]: pairs for v, pairs in recovery.items()},
        reduced_size=len(schedule.surviving_rows),
        provenance={
            "hidden": system.variables[cand.hidden_index],
            "subset": [i + 1 for i in cand.subset],
            "delta": list(cand.delta_signs),
            "epsilon": str(cand.epsilon),
            "seed": config.seed,
            "rank_tol": config.rank_tol,
        })
    return template, None


def select_best(system: PolySystem, config: Config = Config()) -> SolverTemplate:
    """Smallest-basis template; ties broken by reduced pencil size, hidden
    degree, then enumeration order (hidden variable, subset, displacement)."""
    best: Optional[SolverTemplate] = None
    best_key = None
    rejections: List[Tuple[str, str]] = []
    for rec in enumerate_candidates(system, config, with_rejections=True):
        if rec.reason is not None:
            rejections.append((rec.description, rec.reason))
            continue
        cand = rec.candidate
        if best_key is not None and len(cand.basis) > best_key[0]:
            continue
        template, reason = build_template(system, cand, config)
        if template is None:
            rejections.append((rec.description, reason))
            continue
        key = (len(cand.basis), template.reduced_size, template.hidden_degree, cand.enum_index)
        if best_key is None or key < best_key:
            best, best_key = template, key
    if best is None:
        raise GenerationError("no viable basis candidate", rejections)
    return best
