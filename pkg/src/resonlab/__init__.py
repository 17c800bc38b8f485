"""Numerical laboratory for scattering resonances, trapped sets, and
fractal Weyl counting: complex-scaled 1D Schrodinger operators, Hamilton
flow sampling, box-counting dimension estimation, escape-function
verification, and an open baker map at desk scale.
"""

__version__ = "0.1.0"

from . import counting, eig, escape, flow, fractal, model, openmap, scaledop  # noqa: F401
