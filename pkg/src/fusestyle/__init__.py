"""fusestyle - temporally coherent arbitrary style transfer."""

__version__ = "0.4.0"
__author__ = "Andrey Kaliazin"
__license__ = "MIT"
