"""Exact convex geometry over the rationals.

Newton polytopes live in the (n-1)-dimensional exponent space of the
projected system. Everything here is computed with Fraction arithmetic:
basis selection downstream must not depend on floating-point rounding,
so membership of a displaced lattice point is decided exactly.

Polytopes are frequently lower-dimensional (all supports on a common
hyperplane); the affine hull is carried explicitly as a list of rational
equalities alongside the facet inequalities.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import ceil, floor, gcd
from typing import List, Sequence, Set, Tuple

IntVec = Tuple[int, ...]
FracVec = Tuple[Fraction, ...]
# a . x <= b  (facet)  /  a . x == b  (equality)
HalfSpace = Tuple[FracVec, Fraction]

_ENUM_GUARD = 2_000_000  # max integer points scanned per polytope


@dataclass(frozen=True)
class Displacement:
    """A displacement vector with entries in {-eps, 0, +eps}."""

    delta: FracVec
    epsilon: Fraction

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        allowed = {-self.epsilon, Fraction(0), self.epsilon}
        if any(v not in allowed for v in self.delta):
            raise ValueError("displacement entries must be -eps, 0, or +eps")

    @classmethod
    def from_signs(cls, signs: Sequence[int], epsilon: Fraction) -> "Displacement":
        return cls(tuple(Fraction(s) * epsilon for s in signs), Fraction(epsilon))

    @property
    def signs(self) -> Tuple[int, ...]:
        return tuple(0 if v == 0 else (1 if v > 0 else -1) for v in self.delta)


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of integer points: vertex set plus exact H-representation."""

    ambient_dim: int
    vertices: Tuple[IntVec, ...]
    facets: Tuple[HalfSpace, ...]
    affine_hull: Tuple[HalfSpace, ...]

    @property
    def dim(self) -> int:
        return self.ambient_dim - len(self.affine_hull)

    def contains(self, point: Sequence[Fraction]) -> bool:
        """Exact membership test for a rational point."""
        for a, b in self.affine_hull:
            if _dot(a, point) != b:
                return False
        for a, b in self.facets:
            if _dot(a, point) > b:
                return False
        return True


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x))


def _primitive(vec: Sequence[Fraction], rhs: Fraction):
    """Scale (vec, rhs) to coprime integers, keeping the inequality direction."""
    denom = 1
    for v in list(vec) + [rhs]:
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in vec] + [int(rhs * denom)]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1])


def _rref(rows: List[List[Fraction]]):
    """Reduced row echelon form; returns (rows, pivot column list)."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _nullspace(rows: List[List[Fraction]], width: int) -> List[List[Fraction]]:
    """Basis of {x : R x = 0} for the row space R."""
    rref, pivots = _rref(rows) if rows else ([], [])
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * width
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -rref[r][fc]
        basis.append(vec)
    return basis


def _hull_coordinates(points: List[IntVec]):
    """Span basis, per-point coordinates within the affine hull, and the
    ambient coordinate subset used to invert the parametrization."""
    p0 = points[0]
    diffs = [[Fraction(p[i] - p0[i]) for i in range(len(p0))] for p in points]
    basis, _ = _rref(diffs)
    d = len(p0)
    dim = len(basis)
    # pick dim ambient coordinates where the basis matrix is invertible
    cols = [[basis[j][i] for j in range(dim)] for i in range(d)]
    sel, mat = [], []
    for i in range(d):
        if len(sel) == dim:
            break
        if len(_rref([list(t) for t in mat + [cols[i]]])[0]) > len(mat):
            mat.append(cols[i])
            sel.append(i)
    inv = _invert([list(r) for r in mat]) if dim else []
    coords = []
    for diff in diffs:
        rhs = [diff[i] for i in sel]
        coords.append(tuple(_dot(inv[j], rhs) for j in range(dim)))
    return basis, coords, sel, inv


def _invert(mat: List[List[Fraction]]):
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    rref, pivots = _rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix not invertible")
    return [row[n:] for row in rref]


def newton_polytope(support: Sequence[IntVec]) -> LatticePolytope:
    """Convex hull of an exponent support, with exact facet representation."""
    points = sorted(set(tuple(int(v) for v in p) for p in support))
    if not points:
        raise ValueError("empty support")
    d = len(points[0])
    if any(len(p) != d for p in points):
        raise ValueError("mixed-dimension support")

    basis, coords, sel, inv = _hull_coordinates(points)
    dim = len(basis)
    p0 = points[0]

    # affine hull: normals orthogonal to the span
    hull_eqs = []
    for nvec in _nullspace(basis, d):
        a, b = _primitive(nvec, _dot(nvec, p0))
        hull_eqs.append((a, b))
    hull_eqs.sort()

    if dim == 0:
        return LatticePolytope(d, (points[0],), (), tuple(hull_eqs))

    # facets: hyperplanes through dim affinely independent hull points with
    # all remaining points on one side
    facet_set = set()
    for subset in combinations(range(len(points)), dim):
        qs = [coords[i] for i in subset]
        rows = [[qs[i][j] - qs[0][j] for j in range(dim)] for i in range(1, dim)]
        normals = _nullspace(rows, dim)
        if len(normals) != 1:
            continue
        nu = normals[0]
        beta = _dot(nu, qs[0])
        lo = hi = False
        for q in coords:
            v = _dot(nu, q)
            if v < beta:
                lo = True
            elif v > beta:
                hi = True
            if lo and hi:
                break
        if lo and hi:
            continue
        if not lo and not hi:
            continue  # all points on the hyperplane: degenerate subset
        if hi:
            # points sit above nu.x = beta: the valid inequality is nu.x >= beta
            nu = [-v for v in nu]
            beta = -beta
        # lift nu . lambda(x) <= beta back to ambient coordinates
        a = [Fraction(0)] * d
        for j, amb in enumerate(sel):
            a[amb] = sum(nu[r] * inv[r][j] for r in range(dim))
        b = beta + _dot(a, p0)
        facet_set.add(_primitive(a, b))
    facets = sorted(facet_set)

    # vertices: points whose active facet normals span the hull dimension
    verts = []
    for p in points:
        active = [a for a, b in facets if _dot(a, p) == b]
        if len(active) < dim:
            continue
        rank = len(_rref([[Fraction(v) for v in a] for a in active])[0])
        if rank == dim:
            verts.append(p)
    return LatticePolytope(d, tuple(sorted(verts)), tuple(facets), tuple(hull_eqs))


def minkowski_sum(p1: LatticePolytope, p2: LatticePolytope) -> LatticePolytope:
    """Convex hull of all pairwise vertex sums."""
    if p1.ambient_dim != p2.ambient_dim:
        raise ValueError(f"dimension mismatch: {p1.ambient_dim} vs {p2.ambient_dim}")
    sums = {tuple(a + b for a, b in zip(v1, v2)) for v1 in p1.vertices for v2 in p2.vertices}
    return newton_polytope(sorted(sums))


def lattice_points(polytope: LatticePolytope, disp: Displacement) -> Set[IntVec]:
    """Integer points of the displaced polytope, decided exactly.

    Returns { p integer : p - delta inside polytope }, i.e. the lattice
    content of polytope + delta. Facets and hull equalities are primitive
    integer vectors and delta = eps * signs, so membership reduces to
    exact integer comparisons:

        a.(p - delta) <= b  <=>  den*(a.p - b) <= num*(a.signs)

    with eps = num/den.
    """
    d = polytope.ambient_dim
    if len(disp.delta) != d:
        raise ValueError("displacement dimension mismatch")
    lo, hi = [], []
    for i in range(d):
        coords = [v[i] for v in polytope.vertices]
        lo.append(ceil(min(coords) + disp.delta[i]))
        hi.append(floor(max(coords) + disp.delta[i]))
    total = 1
    for a, b in zip(lo, hi):
        total *= max(0, b - a + 1)
    if total > _ENUM_GUARD:
        raise ValueError(f"lattice enumeration too large ({total} candidate points)")
    num, den = disp.epsilon.numerator, disp.epsilon.denominator
    signs = disp.signs

    def _ints(a, b):
        if any(v.denominator != 1 for v in a) or b.denominator != 1:
            raise ValueError("facets must be primitive integer half-spaces")
        av = tuple(int(v) for v in a)
        return av, int(b), num * sum(ai * s for ai, s in zip(av, signs))

    ineqs = [_ints(a, b) for a, b in polytope.facets]
    eqs = [_ints(a, b) for a, b in polytope.affine_hull]
    out = set()
    for p in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        ok = all(den * (sum(ai * pi for ai, pi in zip(a, p)) - b) == rhs for a, b, rhs in eqs)
        if ok:
            ok = all(den * (sum(ai * pi for ai, pi in zip(a, p)) - b) <= rhs for a, b, rhs in ineqs)
        if ok:
            out.add(p)
    return out
