"""Utility modules: logging, file parsing and formatting."""
