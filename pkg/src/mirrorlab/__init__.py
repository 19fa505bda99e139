"""Lorentz mirror and Manhattan models on the plane and on cylinders."""

__version__ = "0.1.0"
