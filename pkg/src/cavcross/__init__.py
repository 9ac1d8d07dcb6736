"""Decentralized safe optimal crossing of CAVs at a multi-lane intersection."""

__version__ = "0.1.0"
