"""Cointegration, volatility and tail-risk toolkit for a stablecoin peg and its reserve index."""

__version__ = "0.1.0"
