"""Weighted p-Laplace solvers, nonlinear potentials and trace-inequality checks."""

from ._plap import *  # noqa: F401,F403
from ._plap import PlapError, __doc__  # noqa: F401
