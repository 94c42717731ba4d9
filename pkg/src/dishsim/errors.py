"""Exception taxonomy shared across the package.

Configuration problems (bad parameter values, malformed files) raise
ConfigError; runtime numerical failures (solver stagnation, CFL violations,
densities or paths leaving their invariant sets) raise NumericalError or a
subclass.  The command-line driver maps the former to exit code 2 and the
latter to exit code 3.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration: bad value, malformed file, unknown key."""


class NumericalError(RuntimeError):
    """A numerical procedure left its contract (divergence, instability)."""


class ConvergenceError(NumericalError):
    """An iterative solver failed to reach its tolerance within its budget."""


class StabilityError(NumericalError):
    """A stability bound was violated (CFL, negativity, domain escape)."""
