"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 1, ResourceError -> 2.
"""


class InputError(ValueError):
    """Malformed or inconsistent user input (bad pmf, length mismatch, ...)."""


class RateError(InputError):
    """Requested rates violate the admissible window."""


class InfeasibleError(InputError):
    """A rate window or constraint set that cannot be satisfied."""


class ResourceError(RuntimeError):
    """A configured resource cap (codebook size, candidate budget) was exceeded."""


class SamplingError(RuntimeError):
    """Rejection sampling failed to produce a typical sequence within the cap."""
