"""Hyperbolic Poisson-Voronoi laboratory.

Numerical stochastic geometry on the hyperbolic plane and on the Bolza
surface: seeded Poisson sampling, Voronoi cells by certified half-space
clipping, closed-form typical-cell references, Fuchsian-group machinery,
graph isoperimetry, standalone lemma checkers, and deterministic SVG
rendering.
"""

__version__ = "0.1.0"
