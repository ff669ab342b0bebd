"""Exception types raised across the package."""


class ArwavesError(Exception):
    """Base class for all package errors."""


class NotRepresentable(ArwavesError, ValueError):
    """The integer is not a sum of two squares."""


class OmegaInvalid(ArwavesError, ValueError):
    """Some prime p = 1 (mod 4) divides n with exponent greater than one."""


class UnsupportedOrder(ArwavesError, ValueError):
    """Requested derivative order exceeds the supported maximum."""


class NotFoundWithinBox(ArwavesError, RuntimeError):
    """Pigeonhole enumeration exhausted its search box."""


class DegenerateGrid(ArwavesError, ValueError):
    """Grid values contain exact zeros that survive the perturbation policy."""


class SkippedLowMargin(ArwavesError, RuntimeError):
    """Nodal extraction is untrustworthy: the zero set passes too close to a critical point."""

    def __init__(self, message, margin=None, threshold=None):
        super().__init__(message)
        self.margin = margin
        self.threshold = threshold


class ConfigInvalid(ArwavesError, ValueError):
    """Experiment configuration failed validation."""


class ModuleError(ArwavesError, RuntimeError):
    """A module-level failure wrapped with experiment context."""
