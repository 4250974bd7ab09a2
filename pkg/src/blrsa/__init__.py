"""Bunker location, routing and spectrum allocation (BLRSA) for elastic optical networks."""

__version__ = "0.1.0"
