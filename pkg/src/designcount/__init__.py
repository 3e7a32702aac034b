"""Counting and verification toolkit for three design families.

Exact enumeration of Steiner triple systems, 1-factorizations of
complete graphs, and Latin squares at small orders; natural-log-space
evaluation of the classical counting bounds; and exact or Monte-Carlo
verification of the random-reveal laws that drive the chain-rule upper
bounds on the counts.
"""

from .core import (
    CountResult,
    DesignError,
    EdgeColoring,
    LatinSquare,
    TripleSystem,
    is_latin,
    third_point,
    to_latin_cube,
    validate_edge_coloring,
    validate_triple_system,
)
from .enumeration import (
    Pool,
    SearchConfig,
    count_latin_squares,
    count_one_factorizations,
    count_triple_systems,
    enumerate_pool,
    sample_uniform,
)
from .bounds import (
    BoundReport,
    LogScalar,
    bound_report,
    cameron_lower_log,
    conjectured_rate_log,
    kahn_lovasz_log,
    log_factorial,
    peel_bound_log,
    vdw_latin_lower_log,
    wilson_bounds,
)

__version__ = "0.1.0"
