"""Singular integrals of discrete measures: truncated operators, ball
averages, martingale averages over nested partitions, and convergence
diagnostics. The heavy lifting lives in the C++ extension ``_pvlab``."""

from ._pvlab import *  # noqa: F401,F403
from ._pvlab import __version__  # noqa: F401
