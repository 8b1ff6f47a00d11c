"""Slow acceptance checks for hmua."""
