"""Core functionality for fusestyle: codec, fusion, losses, training, inference and metrics."""
