"""Post-processing chain for a vacuum-noise heterodyne quantum random number generator."""

__version__ = "0.1.0"
