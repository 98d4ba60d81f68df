"""Minimal graphs over the disk from harmonic self-maps with prescribed dilatation."""

__version__ = "0.1.0"
