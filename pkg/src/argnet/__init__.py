"""Seeded simulator of evidence exchange among Bayesian agents on social networks."""

__version__ = "0.1.0"
