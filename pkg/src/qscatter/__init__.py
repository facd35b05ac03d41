"""Inelastic scattering off an excitable point scatterer and the two-fermion
entanglement it produces."""

__version__ = "0.1.0"
