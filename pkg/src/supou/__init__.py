"""Analytics and Monte Carlo simulation for integrated supOU processes."""

__version__ = "0.1.0"
