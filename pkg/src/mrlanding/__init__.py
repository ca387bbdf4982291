"""Curriculum-trained tabular Double Q-learning for landing a multirotor on a moving platform."""

__version__ = "0.1.0"
