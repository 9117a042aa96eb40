"""Harmonic and length-minimizing graph realizations on a closed genus-2
hyperbolic surface, graph currents with corners, and mapping-class-group
orbit counting."""

__version__ = "0.1.0"
