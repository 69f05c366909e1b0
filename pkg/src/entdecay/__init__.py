"""Statistics of two-qubit entanglement decay under local noisy channels."""
__version__ = "0.1.0"
