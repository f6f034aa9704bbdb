"""Diversity-multiplexing tradeoff tools for ARQ dynamic decode-and-forward."""

__version__ = "0.1.0"
