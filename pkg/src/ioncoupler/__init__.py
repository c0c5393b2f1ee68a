"""ioncoupler - coupling between trapped ions through a floating disk-wire-disk conductor."""

__version__ = "0.1.0"
