"""Multi-epoch SGD on linear regression: risk formulas, Monte Carlo and effective reuse."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
