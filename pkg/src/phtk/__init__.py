"""phtk: pseudo-Hermitian operator toolkit."""

__version__ = "0.1.0"
