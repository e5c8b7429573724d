"""Executable models of the Ku-Chen and Yoon smart-card login schemes and
the attacks that break them."""

__version__ = "0.1.0"
