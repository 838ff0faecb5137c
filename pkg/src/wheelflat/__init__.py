"""Wheel-flat detection and localization from axle-box acceleration."""

__version__ = "0.1.0"
