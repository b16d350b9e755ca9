"""Guidance engine and simulation harness for audio-only pedestrian
navigation: landmark-anchored egocentric instructions plus a corrective
spatial-audio beacon, with a desk-scale replica of the field evaluation.
"""

__version__ = "0.1.0"
