"""Spherical transforms, Hecke and wave operators on the hyperbolic plane,
point-mass distribution algebra and Weyl-law harnesses."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("cuspkit")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.1.0"

from ._accel import USE_NUMBA, backend_name
from .errors import CuspkitError

__all__ = ["__version__", "USE_NUMBA", "backend_name", "CuspkitError"]
