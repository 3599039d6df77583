"""Uniform interpolation and conservative extensions for ALC TBoxes."""
__version__ = "0.1.0"
