"""Two-stage stochastic programming engine with hydropower planning models."""

__version__ = "0.1.0"
