"""Sharp constants for multilinear integral operators on the Heisenberg group.

The package computes closed-form operator-norm constants of Hardy,
Hilbert and Hardy-Littlewood-Polya type operators, cross-checks them
against quadrature and Monte Carlo oracles and extremizer lower bounds, and
provides weighted Morrey norms and Muckenhoupt weight diagnostics.
"""
from .errors import *  # noqa: F401,F403
from .heisenberg import *  # noqa: F401,F403
from .special import *  # noqa: F401,F403
from .kernels import *  # noqa: F401,F403
from .measures import *  # noqa: F401,F403
from .spaces import *  # noqa: F401,F403
from .constants import *  # noqa: F401,F403
from .weights import *  # noqa: F401,F403
from .rng import DEFAULT_SEED, generator

__version__ = "0.1.0"
