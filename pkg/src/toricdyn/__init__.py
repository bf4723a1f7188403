"""Dynamics of toric surface maps: fans, support functions, tropicalized
maps, class pullbacks and an exact symbolic oracle."""

__version__ = "0.1.0"
