"""Almost periods and nodal replication for arithmetic random waves on the flat torus."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ArwavesError,
    ConfigInvalid,
    DegenerateGrid,
    ModuleError,
    NotFoundWithinBox,
    NotRepresentable,
    OmegaInvalid,
    SkippedLowMargin,
    UnsupportedOrder,
)
from .lattice import FrequencySet, enumerate_lattice  # noqa: E402
from .covariance import CovarianceKernel, arw_kernel, rescaled_kernel  # noqa: E402
from .almost_period import AlmostPeriod, almost_period_of_kernel  # noqa: E402
from .field import FieldRealization, sample_arw, translated_field  # noqa: E402
from .nodal import Disk, NodalCurveSet, Rectangle, extract_nodal  # noqa: E402

__all__ = [
    "__version__",
    "ArwavesError",
    "ConfigInvalid",
    "DegenerateGrid",
    "ModuleError",
    "NotFoundWithinBox",
    "NotRepresentable",
    "OmegaInvalid",
    "SkippedLowMargin",
    "UnsupportedOrder",
    "FrequencySet",
    "enumerate_lattice",
    "CovarianceKernel",
    "arw_kernel",
    "rescaled_kernel",
    "AlmostPeriod",
    "almost_period_of_kernel",
    "FieldRealization",
    "sample_arw",
    "translated_field",
    "Disk",
    "NodalCurveSet",
    "Rectangle",
    "extract_nodal",
]
