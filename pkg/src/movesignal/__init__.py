"""Deaf-and-dumb robots that talk by moving: protocols, simulator, monitors."""

__version__ = "0.1.0"
