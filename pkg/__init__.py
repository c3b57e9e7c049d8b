"""
nekcm

Calogero-Moser systems, Nekrasov instanton measures, qq-characters and
spectral curves in their rational, trigonometric and elliptic versions.
"""

__version__ = "0.1.0"
