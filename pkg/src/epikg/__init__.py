"""Outbreak-report extraction, ensemble voting, RDF publishing and analytics."""

__version__ = "0.1.0"
