"""Core functionality for Tresse."""
