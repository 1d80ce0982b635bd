"""Utility helpers for Tresse."""
