"""Concrete fatigue simulation, physics-constrained surrogate and lifetime prediction."""

__version__ = "0.1.0"
