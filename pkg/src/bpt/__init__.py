"""Broadband pseudothermal light from spectrally entangled twin beams."""

__version__ = "0.1.0"
