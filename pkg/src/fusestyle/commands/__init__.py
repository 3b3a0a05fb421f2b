"""CLI commands for fusestyle."""
