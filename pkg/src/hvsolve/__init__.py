"""Hidden-variable sparse-resultant minimal solvers.

Offline, a parametric polynomial system is compiled into a compact
generalized-eigenvalue solver template (monomial basis search, resultant
matrix, companion linearization, parasitic-eigenvalue reduction
schedule). Online, the template is instantiated with numeric
coefficients and all roots are read off a reduced GEP.
"""

from .basis_search import BasisCandidate, enumerate_candidates, select_best
from .config import Config
from .poly import PolySystem, format_system, parse_system
from .runtime import SolveOptions, Solution, solve
from .template import SolverTemplate, load, save

__version__ = "0.1.0"

__all__ = [
    "BasisCandidate",
    "Config",
    "PolySystem",
    "SolveOptions",
    "Solution",
    "SolverTemplate",
    "enumerate_candidates",
    "format_system",
    "load",
    "parse_system",
    "save",
    "select_best",
    "solve",
    "__version__",
]
