"""Executable cone constructions: GPT measurements and capacity, cone
factorizations and one-way protocols, completely positive lifts of the
correlation polytope, and circuit-defined 0/1 polytopes as faces of it."""

__version__ = "0.1.0"
