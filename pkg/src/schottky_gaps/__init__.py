"""Gap statistics of orbit tangencies for a three-reflection Schottky group."""

__version__ = "0.1.0"
