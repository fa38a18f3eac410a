"""Numerical laboratory for finite-rank singular perturbations of discrete selfadjoint operators."""

__version__ = "0.1.0"
