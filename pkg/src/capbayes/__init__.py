"""Capacity-limited Bayesian bandit and tabular-MDP agents built on Blahut-Arimoto."""

__version__ = "0.1.0"
