"""Super-resolution mmWave MIMO channel estimation with 2D unitary ESPRIT."""

__version__ = "0.1.0"
