"""Utilities for fusestyle."""
