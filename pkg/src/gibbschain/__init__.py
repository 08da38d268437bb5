"""gibbschain: a numerical laboratory for 1D quantum Gibbs states.

Builds long-range interacting chains, truncates their interactions across
block partitions, constructs belief-propagation and inclusion-exclusion
operators, and certifies the explicit locality and correlation-decay
inequalities that govern them against exact dense computations.
"""

from . import chain, cluster, config, locality, opalg, oracles, profiles, qbp
from .errors import GibbsChainError

__version__ = "0.1.0"

__all__ = [
    "chain",
    "cluster",
    "config",
    "locality",
    "opalg",
    "oracles",
    "profiles",
    "qbp",
    "GibbsChainError",
    "__version__",
]
