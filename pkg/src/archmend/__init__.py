"""Architecture erosion workbench: conformance checking, diagnosis, and repair."""

__version__ = "0.1.0"
