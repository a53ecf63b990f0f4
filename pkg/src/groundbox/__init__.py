"""groundbox: dataset construction and evaluation toolkit for 2D/3D grounding."""

__version__ = "0.1.0"
