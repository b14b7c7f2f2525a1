"""Command-line handlers and instance generators."""
