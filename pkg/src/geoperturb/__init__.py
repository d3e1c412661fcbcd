"""Personalized 3D spatiotemporal trajectory privacy toolkit."""

__version__ = "0.1.0"

from .grid import LocationGrid, HilbertOrder, build_grid, distance2, distance3, hilbert_orders

__all__ = [
    "LocationGrid",
    "HilbertOrder",
    "build_grid",
    "distance2",
    "distance3",
    "hilbert_orders",
    "__version__",
]
