"""Benchmark harness: worked systems, planted-root generation, stability runs.

Planted instances are built by sampling each polynomial's coefficient
vector from the null space of the vanishing conditions at the prescribed
roots, so every planted root is an exact common root up to rounding.
Near-degenerate instances plant a pair of roots at a small prescribed
distance, the desk-scale stand-in for ill-conditioned scene geometry.
"""

import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .basis_search import select_best
from .config import Config
from .errors import InstanceError
from .poly import (CoeffSlot, ParamPolynomial, PolySystem, evaluate, grlex_key,
                   parse_system)
from .runtime import SolveOptions, solve
from .template import SolverTemplate

PLANT_RESIDUAL_TOL = 1e-12

_BUILTIN_TEXT = {
    "SYS-A": "vars: x y\npoly 1: c1*x^2 + c2*y^2 + c3\npoly 2: c4*x*y + c5\n",
    "SYS-B": "vars: x y\npoly 1: c1*x + c2*y + c3\npoly 2: c4*x*y + c5\n",
    "SYS-C": ("vars: x y\npoly 1: c1*x + c2*y + c3\npoly 2: c4*x*y + c5\n"
              "poly 3: c6*x^2 + c7*y^2 + c8\n"),
}
_BUILTIN_VALUES = {
    "SYS-A": {"c1": 1.0, "c2": 1.0, "c3": -5.0, "c4": 1.0, "c5": -2.0},
    "SYS-B": {"c1": 1.0, "c2": 1.0, "c3": -3.0, "c4": 1.0, "c5": -2.0},
    "SYS-C": {"c1": 1.0, "c2": 1.0, "c3": -3.0, "c4": 1.0, "c5": -2.0,
              "c6": 1.0, "c7": 1.0, "c8": -5.0},
}
_BUILTIN_ROOTS = {
    "SYS-A": ((1.0, 2.0), (2.0, 1.0), (-1.0, -2.0), (-2.0, -1.0)),
    "SYS-B": ((1.0, 2.0), (2.0, 1.0)),
    "SYS-C": ((1.0, 2.0), (2.0, 1.0)),
}


def builtin(name: str):
    """Worked system, standard instance, and its exact roots."""
    if name not in _BUILTIN_TEXT:
        raise KeyError(f"unknown builtin {name!r} (have {', '.join(sorted(_BUILTIN_TEXT))})")
    system = parse_system(_BUILTIN_TEXT[name])
    by_name = {s.name: s for s in system.slots()}
    instance = {by_name[k]: v for k, v in _BUILTIN_VALUES[name].items()}
    return system, instance, _BUILTIN_ROOTS[name]


@dataclass(frozen=True)
class PlantedSpec:
    n: int
    m: int
    degree: int
    roots: Tuple[Tuple[complex, ...], ...]
    density: float = 0.9
    separation: float = 0.25

    def __post_init__(self):
        if self.m < self.n:
            raise ValueError("need m >= n")
        if not (0.0 < self.density <= 1.0):
            raise ValueError("density must lie in (0, 1]")
        simplex = math.comb(self.n + self.degree, self.n)
        if simplex <= len(self.roots):
            raise ValueError(
                f"degree-{self.degree} supports have at most {simplex} monomials, "
                f"cannot vanish at {len(self.roots)} roots")


def _simplex(n: int, degree: int) -> List[Tuple[int, ...]]:
    return sorted((e for e in product(range(degree + 1), repeat=n) if sum(e) <= degree),
                  key=grlex_key)


def plant_instance(system: PolySystem, roots: Sequence[Sequence[complex]], rng
                   ) -> Dict[CoeffSlot, float]:
    """Coefficient values making every given root an exact common root."""
    values: Dict[CoeffSlot, float] = {}
    for poly in system.polys:
        monos = sorted(poly.terms, key=grlex_key)
        rows = []
        for root in roots:
            z = np.asarray(root, dtype=complex)
            row = [np.prod(z ** np.asarray(e)) for e in monos]
            rows.append([v.real for v in row])
            if any(abs(complex(c).imag) > 0 for c in root):
                rows.append([v.imag for v in row])
        null = scipy.linalg.null_space(np.asarray(rows))
        if null.shape[1] == 0:
            raise InstanceError(
                f"support of size {len(monos)} admits no coefficient vector "
                f"vanishing at {len(roots)} roots")
        coeff = null @ rng.normal(size=null.shape[1])
        coeff /= np.linalg.norm(coeff)
        for e, v in zip(monos, coeff):
            values[poly.terms[e]] = float(v)
    for root in roots:
        res = evaluate(system, values, root)
        if np.max(res) > PLANT_RESIDUAL_TOL:
            raise InstanceError(f"planted root {root} has residual {np.max(res):.3g}")
    return values


def _draw_system(spec: PlantedSpec, rng) -> PolySystem:
    monos = _simplex(spec.n, spec.degree)
    counter = 0
    for _ in range(50):
        supports = []
        ok = True
        for _ in range(spec.m):
            support = [e for e in monos
                       if sum(e) == 0 or rng.uniform() < spec.density]
            if len(support) <= len(spec.roots):
                ok = False
                break
            supports.append(support)
        if not ok:
            continue
        covered = [any(e[v] > 0 for s in supports for e in s) for v in range(spec.n)]
        if not all(covered):
            continue
        variables = tuple(f"x{i + 1}" for i in range(spec.n))
        polys = []
        counter = 0
        for i, support in enumerate(supports):
            terms = {}
            for e in support:
                counter += 1
                terms[e] = CoeffSlot(name=f"c{counter}", poly_index=i, exponent=e)
            polys.append(ParamPolynomial(terms))
        return PolySystem(variables=variables, polys=tuple(polys))
    raise InstanceError("could not draw a viable support in 50 attempts")


def generate_planted(spec: PlantedSpec, seed: int):
    """Random-support system plus an instance vanishing at spec.roots."""
    for i in range(len(spec.roots)):
        for j in range(i + 1, len(spec.roots)):
            dist = max(abs(complex(a) - complex(b))
                       for a, b in zip(spec.roots[i], spec.roots[j]))
            if dist < spec.separation:
                raise ValueError(f"roots {i} and {j} closer than separation {spec.separation}")
    rng = np.random.default_rng([seed, 7])
    last = None
    for _ in range(20):
        system = _draw_system(spec, rng)
        try:
            return system, plant_instance(system, spec.roots, rng)
        except InstanceError as exc:
            last = exc
    raise InstanceError(f"planting failed after 20 support redraws: {last}")


def generate_near_degenerate(spec: PlantedSpec, seed: int, gap: float):
    """As generate_planted, but with two roots forced to distance gap."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    if len(spec.roots) < 2:
        raise ValueError("need at least two roots to form a near-degenerate pair")
    rng = np.random.default_rng([seed, 11])
    direction = rng.normal(size=spec.n)
    direction /= np.linalg.norm(direction)
    base = np.asarray([complex(v).real for v in spec.roots[0]])
    moved = tuple(base + gap * direction)
    roots = (spec.roots[0], moved) + tuple(spec.roots[2:])
    # the gap pair intentionally violates the separation floor
    bumped = PlantedSpec(n=spec.n, m=spec.m, degree=spec.degree, roots=roots,
                         density=spec.density, separation=0.0)
    return generate_planted(bumped, seed)


def closest_root_error(solutions, roots) -> float:
    """Max over planted roots of the distance to the closest returned solution."""
    worst = 0.0
    for root in roots:
        best = math.inf
        for sol in solutions:
            dist = max(abs(p - complex(r)) for p, r in zip(sol.point, root))
            best = min(best, dist)
        worst = max(worst, best)
    return worst


@dataclass(frozen=True)
class StabilityReport:
    mode: str
    seed: int
    trials: int
    failures: int
    log_errors: Tuple[Optional[float], ...]
    log_residuals: Tuple[Optional[float], ...]
    solve_seconds: Tuple[Optional[float], ...]
    quantiles: Dict[str, float] = field(default_factory=dict)
    histogram: Tuple[Tuple[int, ...], Tuple[int, ...]] = ((), ())

    @property
    def successes(self) -> int:
        return self.trials - self.failures

    @property
    def median_log_error(self) -> float:
        return self.quantiles.get("q50", math.nan)

    def mean_solve_seconds(self) -> float:
        times = [t for t in self.solve_seconds if t is not None]
        return float(np.mean(times)) if times else math.nan

    def csv_rows(self) -> List[str]:
        rows = ["trial,status,log10_error,log10_residual,solve_seconds"]
        for i in range(self.trials):
            err = self.log_errors[i]
            res = self.log_residuals[i]
            sec = self.solve_seconds[i]
            status = "ok" if err is not None else "fail"
            rows.append(f"{i},{status},"
                        f"{'' if err is None else f'{err:.6f}'},"
                        f"{'' if res is None else f'{res:.6f}'},"
                        f"{'' if sec is None else f'{sec:.6e}'}")
        return rows

    def summary_text(self) -> str:
        q = self.quantiles
        lines = [
            f"mode: {self.mode}",
            f"seed: {self.seed}",
            f"trials: {self.trials} (failures: {self.failures})",
            f"log10 error quantiles: q10={q.get('q10', math.nan):.3f} "
            f"q50={q.get('q50', math.nan):.3f} q90={q.get('q90', math.nan):.3f}",
            f"mean solve time: {self.mean_solve_seconds():.3e} s",
        ]
        return "\n".join(lines)

    def histogram_text(self) -> str:
        edges, counts = self.histogram
        lines = ["# log10_error_bin count"]
        for e, c in zip(edges, counts):
            lines.append(f"{e} {c}")
        return "\n".join(lines)


def _quantiles(values: List[float]) -> Dict[str, float]:
    if not values:
        return {"q10": math.nan, "q50": math.nan, "q90": math.nan}
    qs = np.percentile(values, [10, 50, 90])
    return {"q10": float(qs[0]), "q50": float(qs[1]), "q90": float(qs[2])}


def _histogram(values: List[float]):
    edges = tuple(range(-17, 2))
    counts = [0] * len(edges)
    for v in values:
        idx = min(max(int(math.floor(v)), edges[0]), edges[-1]) - edges[0]
        counts[idx] += 1
    return edges, tuple(counts)


def _draw_roots(n: int, count: int, mode: str, gap: float, separation: float, rng):
    for _ in range(200):
        if mode == "near_degenerate":
            first = rng.uniform(-1.0, 1.0, size=n)
            direction = rng.normal(size=n)
            direction /= np.linalg.norm(direction)
            roots = [first, first + gap * direction]
            extra = count - 2
        else:
            roots = [rng.uniform(-1.0, 1.0, size=n)]
            extra = count - 1
        for _ in range(extra):
            roots.append(rng.uniform(-1.0, 1.0, size=n))
        base = roots[:2] if mode == "near_degenerate" else roots[:1]
        ok = True
        check_from = len(base)
        for i in range(len(roots)):
            for j in range(max(i + 1, check_from), len(roots)):
                if np.max(np.abs(roots[i] - roots[j])) < separation:
                    ok = False
        if ok:
            return [tuple(map(float, r)) for r in roots]
    raise InstanceError("could not draw separated roots")


def run_stability(target: Union[SolverTemplate, PolySystem], trials: int, mode: str,
                  seed: int, gap: float = 1e-2, config: Config = Config(),
                  fail_tol: float = 1e-2) -> StabilityReport:
    """Solve `trials` random planted instances of one system shape.

    Per trial: plant roots (a gap-separated pair in near_degenerate mode),
    solve, and record the closest-solution error against every planted
    root. Failures (no valid solution, planting error, or error above
    fail_tol) are counted, never raised. Deterministic in `seed`: each
    trial derives its own random stream.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in ("random", "near_degenerate"):
        raise ValueError(f"unknown mode {mode!r}")
    template = target if isinstance(target, SolverTemplate) else select_best(target, config)
    system = template.system()
    feasible = min(len(p.terms) for p in system.polys) - 1
    n_roots = 2 if mode == "near_degenerate" else min(2, feasible)
    options = SolveOptions(residual_tol=config.residual_tol,
                           consistency_tol=config.consistency_tol,
                           ratio_tol=config.ratio_tol, pivot_tol=config.pivot_tol,
                           inf_tol=config.inf_tol)
    log_err: List[Optional[float]] = []
    log_res: List[Optional[float]] = []
    secs: List[Optional[float]] = []
    failures = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, 3, trial])
        try:
            if n_roots > feasible:
                raise InstanceError(f"supports admit at most {feasible} planted roots")
            roots = _draw_roots(system.n, n_roots, mode, gap, 0.4, rng)
            instance = plant_instance(system, roots, rng)
            t0 = time.perf_counter()
            sols = solve(template, instance, options)
            dt = time.perf_counter() - t0
            if not sols:
                raise InstanceError("no valid solutions returned")
            err = closest_root_error(sols, roots)
            resid = max(s.max_residual for s in sols)
            if not math.isfinite(err) or err > fail_tol:
                raise InstanceError(f"closest-root error {err:.3g} above {fail_tol}")
        except InstanceError:
            failures += 1
            log_err.append(None)
            log_res.append(None)
            secs.append(None)
            continue
        log_err.append(math.log10(max(err, 1e-300)))
        log_res.append(math.log10(max(resid, 1e-300)))
        secs.append(dt)
    good = [v for v in log_err if v is not None]
    return StabilityReport(mode=mode, seed=seed, trials=trials, failures=failures,
                           log_errors=tuple(log_err), log_residuals=tuple(log_res),
                           solve_seconds=tuple(secs), quantiles=_quantiles(good),
                           histogram=_histogram(good))
