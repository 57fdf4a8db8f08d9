"""Quantum bit commitment: cheating attacks and decoy-based protocols."""

__version__ = "0.1.0"
