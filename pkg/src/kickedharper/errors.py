"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration is malformed (unknown keys, bad types, bad ranges)."""


class LatticeOverflowError(RuntimeError):
    """Probability reached the lattice edge; the caller must grow the lattice and retry."""


class ResourceLimitError(RuntimeError):
    """A hard resource cap (e.g. maximum lattice size) was exceeded."""


class NumericalError(RuntimeError):
    """A computation violated its own accuracy contract (unitarity, eigenvalue moduli, ...)."""
