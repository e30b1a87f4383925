"""Global-and-local clustering for source-free universal domain adaptation."""

__version__ = "0.1.0"
