"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and NumericalFailure (including
GenerationFailure) to exit code 3.
"""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class NumericalFailure(RuntimeError):
    """A run produced non-finite or unphysical numbers beyond tolerance."""


class GenerationFailure(NumericalFailure):
    """Random instance generation kept failing (e.g. no stable crystal)."""
