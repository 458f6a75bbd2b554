"""One-dimensional gray-diffusion radiation hydrodynamics with LIMEX time stepping."""

from .errors import RadimexError
from .physics import ConstantOpacity, Constants, EosIdealGas, PowerLawOpacity
from .state import CellState, Grid1D, total_energy

__version__ = "0.1.0"

__all__ = [
    "CellState",
    "ConstantOpacity",
    "Constants",
    "EosIdealGas",
    "Grid1D",
    "PowerLawOpacity",
    "RadimexError",
    "total_energy",
]
