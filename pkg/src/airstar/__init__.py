"""AirStar: a desk-scale UAV agent stack with a simulated campus world."""

__version__ = "0.1.0"
