"""Command-line interface for macro ranking experiments."""
