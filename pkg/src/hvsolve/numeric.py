"""Dense numerical kernels: generalized eigenvalues, numeric rank, roots.

The generalized eigenvalue solver must cope with singular pencils (B is
almost never invertible before parasitic-eigenvalue removal), so it works
in the homogeneous (alpha, beta) representation of the QZ decomposition
and never inverts B.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateMatrixError, EigenSolveError

FINITE = "finite"
INFINITE = "infinite"
INDETERMINATE = "indeterminate"

# classification band used when comparing spectra of reduced vs unreduced
# pencils: eigenvalues outside it are the parasitic 0 / inf ones
ZERO_BAND = 1e-10
INF_BAND = 1e10


@dataclass(frozen=True)
class EigenPair:
    """One generalized eigenpair in homogeneous form (alpha, beta)."""

    alpha: complex
    beta: complex
    vector: np.ndarray
    classification: str

    @property
    def value(self) -> Optional[complex]:
        return self.alpha / self.beta if self.classification == FINITE else None


def gep_solve(A: np.ndarray, B: np.ndarray, inf_tol: float = 1e-10) -> List[EigenPair]:
    """All eigenpairs of A v = lambda B v via the QZ path of LAPACK.

    A pair is classified infinite when |beta| <= inf_tol * |alpha| and
    indeterminate when alpha and beta both vanish (common nullspace).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"need square matrices of equal size, got {A.shape} and {B.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise ValueError("non-finite entries in pencil")
    try:
        w, vr = scipy.linalg.eig(A, B, homogeneous_eigvals=True)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"QZ iteration failed on {A.shape[0]}x{A.shape[0]} pencil: {exc}") from exc
    alpha, beta = np.asarray(w)
    pairs = []
    for i in range(A.shape[0]):
        a, b = complex(alpha[i]), complex(beta[i])
        if abs(b) > inf_tol * abs(a):
            cls = FINITE
        elif abs(a) > 0:
            cls = INFINITE
        else:
            cls = INDETERMINATE
        pairs.append(EigenPair(alpha=a, beta=b, vector=vr[:, i], classification=cls))
    return pairs


def finite_eigenvalues(pairs: Sequence[EigenPair]) -> np.ndarray:
    return np.array([p.value for p in pairs if p.classification == FINITE], dtype=complex)


def numeric_rank(M: np.ndarray, rel_tol: float) -> int:
    """Number of singular values above rel_tol times the largest one."""
    if not (0.0 < rel_tol < 1.0):
        raise ValueError("rel_tol must lie in (0, 1)")
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite entries")
    if M.size == 0:
        return 0
    s = scipy.linalg.svdvals(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def poly_roots(coeffs: Sequence[complex]) -> np.ndarray:
    """Roots of c[0] + c[1] x + ... + c[q] x^q via the companion matrix."""
    c = np.asarray(coeffs)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need at least a degree-1 coefficient list")
    if c[-1] == 0:
        raise ValueError("zero leading coefficient")
    return np.roots(c[::-1])


def trim_trailing(coeffs: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    """Drop near-zero leading (highest-degree) coefficients, relative to the largest."""
    c = np.asarray(coeffs)
    scale = np.max(np.abs(c))
    if scale == 0:
        return c[:1]
    keep = len(c)
    while keep > 1 and abs(c[keep - 1]) <= rel_tol * scale:
        keep -= 1
    return c[:keep]


def det_interpolation_oracle(template, instance) -> np.ndarray:
    """Coefficients (ascending) of det M'(x) by sampling at roots of unity.

    Test oracle only: it evaluates the resultant matrix directly from the
    template's placement map, independently of the companion/GEP path, and
    interpolates the degree <= l*b determinant polynomial exactly up to
    conditioning. Production solving goes through the pencil instead.
    """
    b = len(template.basis)
    l = template.hidden_degree
    n_nodes = l * b + 1
    nodes = np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    dets = np.empty(n_nodes, dtype=complex)
    max_entry = 0.0
    for k, x in enumerate(nodes):
        M = np.zeros((b, b), dtype=complex)
        for (r, c, e), slot in template.placement.items():
            M[r, c] += instance[slot] * x ** e
        if k == 0:
            max_entry = float(np.max(np.abs(M))) if M.size else 0.0
        dets[k] = np.linalg.det(M)
    scale = max(1.0, max_entry) ** b
    if np.max(np.abs(dets)) <= 1e-12 * scale:
        raise DegenerateMatrixError(
            "determinant vanishes at all sample nodes: structurally singular resultant matrix")
    coeffs = np.fft.fft(dets) / n_nodes
    return np.real_if_close(coeffs, tol=1000)


def multiset_match(left: Sequence[complex], right: Sequence[complex], rel_tol: float) -> bool:
    """Greedy multiset comparison of complex values with relative tolerance."""
    if len(left) != len(right):
        return False
    remaining = list(right)
    for lv in sorted(left, key=abs, reverse=True):
        if not remaining:
            return False
        j = min(range(len(remaining)), key=lambda k: abs(remaining[k] - lv))
        if abs(remaining[j] - lv) > rel_tol * max(1.0, abs(lv)):
            return False
        remaining.pop(j)
    return not remaining
