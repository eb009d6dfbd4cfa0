"""Dead-reckon a ground vehicle through GNSS outages and learn away the drift."""

__version__ = "0.1.0"
