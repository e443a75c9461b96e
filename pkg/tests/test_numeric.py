import numpy as np
import pytest

from hvsolve.errors import DegenerateMatrixError
from hvsolve.numeric import (det_interpolation_oracle, finite_eigenvalues, gep_solve,
                             multiset_match, numeric_rank, poly_roots, trim_trailing)
from hvsolve.pencil import band_filter
from hvsolve.runtime import instantiate


def test_gep_simple_regular_pencil():
    A = np.array([[3.0, -1.0], [2.0, 0.0]])
    pairs = gep_solve(A, np.eye(2))
    assert multiset_match(finite_eigenvalues(pairs), [1.0, 2.0], 1e-10)


def test_gep_zero_b_all_infinite():
    pairs = gep_solve(np.eye(3), np.zeros((3, 3)))
    assert all(p.classification == "infinite" for p in pairs)
    assert all(p.value is None for p in pairs)


def test_gep_sys_a_companion_pencil(tpl_a, sys_a):
    _, instance, _ = sys_a
    A, B = instantiate(tpl_a, instance)
    pairs = gep_solve(A, B)
    finite = finite_eigenvalues(pairs)
    assert multiset_match(finite, [-2, -1, 1, 2], 1e-8)
    assert sum(p.classification == "infinite" for p in pairs) == 2


def test_gep_rejects_bad_shapes():
    with pytest.raises(ValueError):
        gep_solve(np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        gep_solve(np.array([[np.nan]]), np.eye(1))


def test_gep_residual_bound():
    rng = np.random.default_rng(5)
    for _ in range(10):
        A = rng.normal(size=(6, 6))
        B = rng.normal(size=(6, 6))
        for p in gep_solve(A, B):
            if p.classification != "finite":
                continue
            lam = p.value
            resid = np.linalg.norm(A @ p.vector - lam * (B @ p.vector))
            bound = 1e-8 * (np.linalg.norm(A) + abs(lam) * np.linalg.norm(B))
            assert resid <= bound * np.linalg.norm(p.vector)


def test_gep_scale_invariance():
    rng = np.random.default_rng(8)
    A = rng.normal(size=(5, 5))
    B = rng.normal(size=(5, 5))
    B[:, 0] = 0.0
    base = gep_solve(A, B)
    scaled = gep_solve(10.0 * A, 10.0 * B)
    assert [p.classification for p in base] == [p.classification for p in scaled]
    assert multiset_match(finite_eigenvalues(base), finite_eigenvalues(scaled), 1e-9)


def test_numeric_rank_examples():
    assert numeric_rank(np.eye(3), 1e-8) == 3
    assert numeric_rank(np.array([[1.0, 2.0], [2.0, 4.0]]), 1e-8) == 1
    assert numeric_rank(np.zeros((4, 2)), 1e-8) == 0


def test_numeric_rank_sys_a_stacked(tpl_a):
    # the selected square resultant matrix is full rank at a random instance
    rng = np.random.default_rng(17)
    values = {s: rng.uniform(-1, 1) for s in tpl_a.slots}
    x = rng.uniform(-1, 1)
    b = len(tpl_a.basis)
    M = np.zeros((b, b))
    for (r, c, e), slot in tpl_a.placement.items():
        M[r, c] += values[slot] * x ** e
    assert numeric_rank(M, 1e-8) == 3


def test_poly_roots_worked_examples():
    assert multiset_match(poly_roots([4, 0, -5, 0, 1]), [1, -1, 2, -2], 1e-9)
    assert multiset_match(poly_roots([2, -3, 1]), [1, 2], 1e-12)
    assert multiset_match(poly_roots([0, 1]), [0], 1e-12)


def test_poly_roots_zero_leading_coefficient():
    with pytest.raises(ValueError):
        poly_roots([1, 2, 0])


def test_trim_trailing():
    c = np.array([4.0, 0.0, -5.0, 0.0, 1.0, 1e-14, 0.0])
    assert np.array_equal(trim_trailing(c), c[:5])
    assert trim_trailing(np.zeros(4)).tolist() == [0.0]


def test_oracle_sys_a_determinant(tpl_a, sys_a):
    _, instance, _ = sys_a
    coeffs = trim_trailing(det_interpolation_oracle(tpl_a, instance))
    # det M'(y) = y^4 - 5 y^2 + 4 up to sign
    got = np.real(coeffs / coeffs[-1])
    assert np.allclose(got, [4, 0, -5, 0, 1], atol=1e-9)


def test_oracle_sys_b_determinant(tpl_b, sys_b):
    _, instance, _ = sys_b
    coeffs = trim_trailing(det_interpolation_oracle(tpl_b, instance))
    got = np.real(coeffs / coeffs[-1])
    assert np.allclose(got, [2, -3, 1], atol=1e-10)


def test_oracle_reports_structural_degeneracy():
    from types import SimpleNamespace
    from hvsolve.poly import CoeffSlot

    slot = CoeffSlot("u", 0, (0, 0))
    fake = SimpleNamespace(basis=((0,), (1,)), hidden_degree=1,
                           placement={(0, 0, 0): slot, (1, 0, 1): slot})
    with pytest.raises(DegenerateMatrixError):
        det_interpolation_oracle(fake, {slot: 0.7})


def test_oracle_matches_pencil_spectrum(tpl_a):
    rng = np.random.default_rng(23)
    for _ in range(10):
        values = {s: rng.uniform(-1, 1) for s in tpl_a.slots}
        coeffs = trim_trailing(det_interpolation_oracle(tpl_a, values))
        roots = band_filter(poly_roots(coeffs))
        A, B = instantiate(tpl_a, values)
        finite = band_filter(finite_eigenvalues(gep_solve(A, B)))
        assert multiset_match(finite, roots, 1e-6)


def test_multiset_match_rejects_count_and_value_mismatch():
    assert not multiset_match([1.0, 2.0], [1.0], 1e-6)
    assert not multiset_match([1.0, 2.0], [1.0, 2.1], 1e-6)
    assert multiset_match([1.0 + 0j, 2.0], [2.0, 1.0 + 5e-7j], 1e-6)
