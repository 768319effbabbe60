"""Complex linearization of systems of two second-order ODEs."""

__version__ = "0.1.0"
