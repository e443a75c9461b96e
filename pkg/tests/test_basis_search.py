from fractions import Fraction

import numpy as np
import pytest

from hvsolve.basis_search import (BasisCandidate, build_template, candidate_invariants,
                                  enumerate_candidates, multiplier_set, rank_test,
                                  select_best, select_rows)
from hvsolve.config import Config
from hvsolve.errors import GenerationError
from hvsolve.poly import parse_system

EPS = Fraction(1, 1000)


def make_candidate(hidden, subset, signs, basis, multipliers, enum_index=0):
    return BasisCandidate(hidden_index=hidden, subset=subset, delta_signs=signs,
                          epsilon=EPS, basis=basis, multipliers=multipliers,
                          enum_index=enum_index)


def test_multiplier_set_worked_examples():
    basis = ((1,), (2,), (3,))
    assert multiplier_set(((0,), (2,)), basis) == ((1,),)
    assert multiplier_set(((0,), (1,)), basis) == ((1,), (2,))
    assert multiplier_set(((1,), (2,), (3,)), basis) == ((0,),)


def test_multiplier_set_empty_when_support_does_not_fit():
    assert multiplier_set(((0,), (2,)), ((1,),)) == ()


def test_enumeration_count_sys_a(sys_a):
    system, _, _ = sys_a
    records = list(enumerate_candidates(system, Config(), with_rejections=True))
    assert len(records) == 18  # 2 variables x 3 subsets x 3 displacements
    accepted = [r.candidate for r in records if r.reason is None]
    assert all(candidate_invariants(system, c) is None for c in accepted)


def test_enumeration_worked_acceptance_and_rejection(sys_a):
    system, _, _ = sys_a
    records = list(enumerate_candidates(system, Config(), with_rejections=True))
    by_key = {(r.candidate.hidden_index, r.candidate.subset, r.candidate.delta_signs): r
              for r in records if r.candidate is not None}
    # hiding y, both polynomials, +eps: basis {x, x^2, x^3} with 3 rows
    rec = by_key[(1, (0, 1), (1,))]
    assert rec.reason is None
    assert rec.candidate.basis == ((1,), (2,), (3,))
    assert rec.candidate.multipliers == (((1,),), ((1,), (2,)))
    # hiding y, f2 alone, +eps: f1 cannot contribute
    rec = by_key[(1, (1,), (1,))]
    assert rec.reason is not None and "f1" in rec.reason


def test_enumeration_rejects_univariate(sys_a):
    system = parse_system("vars: x; f1: c1*x^2+c2*x+c3")
    with pytest.raises(GenerationError, match="root finder"):
        list(enumerate_candidates(system, Config()))


def test_rank_test_accepts_worked_candidate(sys_a):
    system, _, _ = sys_a
    cand = make_candidate(1, (0, 1), (1,), ((1,), (2,), (3,)),
                          (((1,),), ((1,), (2,))))
    assert rank_test(system, cand, trials=5, seed=7)


def test_rank_test_rejects_duplicate_rows(sys_a):
    # same polynomial with the same multiplier listed twice: two identical
    # rows at every coefficient instance
    system, _, _ = sys_a
    cand = make_candidate(1, (0,), (0,), ((0,), (1,), (2,)),
                          (((0,), (0,)), ((0,),)))
    assert cand.total_rows == 3
    assert not rank_test(system, cand, trials=3, seed=7)


def test_generator_rejects_rank_deficient_candidate(sys_a):
    # count-based acceptance (every polynomial contributes, enough rows)
    # holds, yet the stacked matrix is rank deficient: the gate must say so
    system, _, _ = sys_a
    cand = make_candidate(1, (0,), (0,), ((0,), (1,), (2,)),
                          (((0,), (0,)), ((0,),)))
    assert candidate_invariants(system, cand) is None
    template, reason = build_template(system, cand, Config())
    assert template is None
    assert "rank deficient" in reason


def test_select_rows_keeps_enumeration_order_when_square(sys_a):
    system, _, _ = sys_a
    cand = make_candidate(1, (0, 1), (1,), ((1,), (2,), (3,)),
                          (((1,),), ((1,), (2,))))
    rows = select_rows(system, cand, Config())
    assert rows == ((0, (1,)), (1, (1,)), (1, (2,)))


def test_select_rows_drops_redundant_duplicate_row(sys_a):
    system, _, _ = sys_a
    cand = make_candidate(1, (0, 1), (1,), ((1,), (2,), (3,)),
                          (((1,),), ((1,), (1,), (2,))))
    rows = select_rows(system, cand, Config())
    assert rows is not None
    assert len(set(rows)) == 3
    assert sorted(set(rows)) == [(0, (1,)), (1, (1,)), (1, (2,))]


def test_select_best_sys_a_shape(tpl_a):
    assert len(tpl_a.basis) == 3
    assert tpl_a.hidden_name == "y"
    assert tpl_a.hidden_degree == 2
    assert tpl_a.pencil_size == 6
    assert tpl_a.reduced_size == 4
    assert tpl_a.rows == ((0, (0,)), (1, (0,)), (1, (1,)))


def test_select_best_sys_b_shape(tpl_b):
    assert len(tpl_b.basis) == 2
    assert tpl_b.hidden_degree == 1
    assert tpl_b.pencil_size == 2
    assert tpl_b.reduced_size == 2
    assert tpl_b.schedule.ops == ()


def test_select_best_reports_rejections_when_nothing_viable():
    # hiding z leaves every support on the diagonal of the (x, y) plane, so
    # no basis can contain a unit-difference recovery pair for x or y
    system = parse_system(
        "vars: x y z; f1: c1*x*y*z + c2; f2: c3*x^2*y^2 + c4*z; f3: c5*z^2 + c6")
    with pytest.raises(GenerationError) as err:
        select_best(system, Config(forced_hidden="z"))
    assert err.value.rejections
    assert "pair" in err.value.diagnostics()


def test_forced_hidden_controls_projection(sys_a):
    system, _, _ = sys_a
    tpl = select_best(system, Config(forced_hidden="x"))
    assert tpl.hidden_name == "x"
    with pytest.raises(GenerationError, match="unknown hidden"):
        select_best(system, Config(forced_hidden="z"))


def test_row_correctness_invariant(tpl_a, sys_a):
    # row r = (i, t) of M'(x*) dotted with the basis monomials at a base
    # point equals x^t * f_i at the assembled full point
    system, _, _ = sys_a
    rng = np.random.default_rng(19)
    h = tpl_a.hidden_index
    for _ in range(10):
        values = {s: rng.uniform(-1, 1) for s in tpl_a.slots}
        x_h = rng.uniform(-1, 1)
        base_pt = rng.uniform(-1, 1, size=system.n - 1)
        b = len(tpl_a.basis)
        M = np.zeros((b, b))
        for (r, c, e), slot in tpl_a.placement.items():
            M[r, c] += values[slot] * x_h ** e
        basis_vec = np.array([np.prod(base_pt ** np.asarray(mono)) for mono in tpl_a.basis])
        full_pt = list(base_pt[:h]) + [x_h] + list(base_pt[h:])
        lhs = M @ basis_vec
        for r, (i, t) in enumerate(tpl_a.rows):
            fi = sum(values[slot] * np.prod(np.asarray(full_pt) ** np.asarray(exp))
                     for exp, slot in system.polys[i].terms.items())
            rhs = np.prod(base_pt ** np.asarray(t)) * fi
            assert abs(lhs[r] - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_placement_containment(tpl_a):
    basis = tpl_a.basis
    for (r, c, e), slot in tpl_a.placement.items():
        i, t = tpl_a.rows[r]
        assert slot.poly_index == i
        base = slot.exponent[:tpl_a.hidden_index] + slot.exponent[tpl_a.hidden_index + 1:]
        assert tuple(a + b for a, b in zip(t, base)) == basis[c]
        assert slot.exponent[tpl_a.hidden_index] == e


def test_emitted_template_passes_fresh_rank_gate(tpl_a, sys_a):
    system, _, _ = sys_a
    cand = make_candidate(tpl_a.hidden_index, (0,), (0,), tpl_a.basis,
                          (((0,),), ((0,), (1,))))
    assert rank_test(system, cand, trials=5, seed=(Config().seed + 1))


def test_determinant_vanishes_at_planted_hidden_coordinate(tpl_a, sys_a):
    system, instance, roots = sys_a
    rng = np.random.default_rng(3)
    b = len(tpl_a.basis)

    def det_at(x):
        M = np.zeros((b, b), dtype=complex)
        for (r, c, e), slot in tpl_a.placement.items():
            M[r, c] += instance[slot] * x ** e
        return np.linalg.det(M)

    scale = np.median([abs(det_at(rng.uniform(-3, 3))) for _ in range(20)])
    for root in roots:
        hidden = root[tpl_a.hidden_index]
        assert abs(det_at(hidden)) <= 1e-10 * scale


def test_template_round_trips_through_json(tpl_a, tmp_path):
    from hvsolve import template as tio
    path = tmp_path / "a.tpl"
    tio.save(tpl_a, path)
    again = tio.load(path)
    assert tio.canonical_bytes(again) == tio.canonical_bytes(tpl_a)
    assert again.basis == tpl_a.basis
    assert again.schedule == tpl_a.schedule
    assert dict(again.recovery) == dict(tpl_a.recovery)


def test_subset_enumeration_guard_and_cap():
    parts = ["vars: x y"]
    for i in range(13):
        parts.append(f"p{i}: a{i}*x*y + b{i}*x + d{i}")
    text = "; ".join(parts)
    system = parse_system(text)
    with pytest.raises(GenerationError, match="max_subset_size"):
        list(enumerate_candidates(system, Config()))
    records = list(enumerate_candidates(system, Config(max_subset_size=1),
                                        with_rejections=True))
    assert len(records) == 2 * 13 * 3  # variables x singleton subsets x displacements


def test_tie_break_ordering():
    # candidates compare by (basis size, reduced pencil size, hidden degree,
    # enumeration position), lexicographically
    keys = [(3, 4, 2, 5), (3, 4, 1, 9), (3, 3, 2, 7), (2, 6, 3, 8)]
    assert min(keys) == (2, 6, 3, 8)
    keys = [(3, 4, 2, 5), (3, 4, 1, 9)]
    assert min(keys) == (3, 4, 1, 9)  # smaller hidden degree wins on full tie
