"""Kinetic regularity verifier - numerical checks of transfer-of-regularity estimates for kinetic transport."""

__version__ = "0.1.0"
