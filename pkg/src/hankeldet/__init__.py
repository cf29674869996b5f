"""Random block Hankel determinants on the matrix moment space.

Special functions, log-beta cumulants, canonical moments, Jacobi-beta
ensembles, the determinant process H_n(s, t), its limit objects and a
reproducible experiment harness.
"""

__version__ = "0.1.0"
