"""Exact computation of lower central series, their rational and mod-p
variants, and the induced graded Lie algebras, for polycyclic-presented
groups and split extensions."""

__version__ = "0.1.0"
