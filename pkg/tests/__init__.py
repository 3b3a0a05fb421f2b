"""Test suite for fusestyle."""
