"""Multipartite secret correlations: exact analysis of the P_Omega family and protocol simulation."""

__version__ = "0.1.0"
