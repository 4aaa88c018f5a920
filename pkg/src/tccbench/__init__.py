"""Temporal color constancy benchmark toolkit."""

from .color import ErrorStats, Illuminant, angular_error, normalize, summarize

__all__ = ["ErrorStats", "Illuminant", "angular_error", "normalize", "summarize"]
__version__ = "0.1.0"
