"""Photons-per-bit sensitivity toolkit for phase-sensitive-amplifier coherent receivers."""

__version__ = "0.1.0"
