"""Per-pixel background subtraction (GMG, MOG, MOG2) with evaluation and timing tools."""
from .core import (
    BACKGROUND,
    FOREGROUND,
    SHADOW,
    DimensionError,
    Frame,
    InvalidParameterError,
    Mask,
    masks_equal,
    to_grayscale,
)
from .gmg import GMG, GmgParams
from .mog import MOG, MogParams
from .mog2 import MOG2, Mog2Params
from .registry import create

__all__ = [
    "BACKGROUND", "FOREGROUND", "SHADOW", "DimensionError", "Frame", "InvalidParameterError",
    "Mask", "masks_equal", "to_grayscale", "GMG", "GmgParams", "MOG", "MogParams",
    "MOG2", "Mog2Params", "create",
]

__version__ = "0.1.0"
