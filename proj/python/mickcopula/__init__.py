"""Frank copula and the minimum-information checkerboard copula under fixed Kendall's tau."""

from ._core import *  # noqa: F401,F403
from ._core import MickError, NoConvergence, __doc__  # noqa: F401

__version__ = "0.1.0"
