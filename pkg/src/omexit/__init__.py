"""Game-learning engine: MCTS expert iteration with opponent-conditioned priors."""

__version__ = "0.1.0"
