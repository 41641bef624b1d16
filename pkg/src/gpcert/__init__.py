"""Certification toolkit for the Duhamel expansion of the cubic Gross-Pitaevskii hierarchy."""

__version__ = "0.1.0"
