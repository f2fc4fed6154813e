"""Batch sentence embedding into .sseb/.ids vector files."""

__version__ = "0.1.0"
