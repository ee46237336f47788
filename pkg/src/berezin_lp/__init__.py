"""Closed-form and oracle computations for L^p norms of Toeplitz eigenfunctions.

Bargmann space on C^n and projective space CP^n, together with spectral
window experiments, FBI transforms and an experiment runner.
"""
__version__ = "0.1.0"
