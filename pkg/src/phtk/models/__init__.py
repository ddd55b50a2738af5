"""Truncated oscillator models and seeded random ensembles."""
