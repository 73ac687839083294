"""Billiard flows, rotation functions, Weyl counting and boundary-layer numerics."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    NumericRangeError,
    SpectralBilliardsError,
)
from .geometry import (  # noqa: E402
    CircularAnnulus,
    ConfocalAnnulus,
    Disk,
    Domain,
    Ellipse,
    PhasePoint,
    Polygon,
    RadialLayers,
    domain_from_dict,
    domain_to_dict,
)

__all__ = [
    "__version__",
    "SpectralBilliardsError",
    "ConfigError",
    "NumericRangeError",
    "Domain",
    "Disk",
    "Ellipse",
    "CircularAnnulus",
    "ConfocalAnnulus",
    "Polygon",
    "RadialLayers",
    "PhasePoint",
    "domain_from_dict",
    "domain_to_dict",
]
