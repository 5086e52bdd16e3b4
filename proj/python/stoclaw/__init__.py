"""Numerical laboratory for stochastic scalar conservation laws on (0, 1)
with zero-flux Neumann boundary: viscous finite-volume / mild-solution
solvers plus the kinetic, trace, symbol and regularity diagnostics."""

try:
    from ._stoclaw import *  # noqa: F401,F403  (installed package layout)
    from ._stoclaw import __version__  # noqa: F401
except ImportError:  # in-tree build: extension sits next to the package dir
    from _stoclaw import *  # noqa: F401,F403
    from _stoclaw import __version__  # noqa: F401
