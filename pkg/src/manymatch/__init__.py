"""Geometric many-to-many matching."""
