"""Derived homotopy algebras on bicomplexes: transfer, verification, spectral sequences, bar/cobar."""

__version__ = "0.1.0"
