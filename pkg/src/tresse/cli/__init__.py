"""Command-line interface for Tresse."""
