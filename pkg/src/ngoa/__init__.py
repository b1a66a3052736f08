"""Virtual test bed for next-generation optical access architectures."""

__version__ = "0.1.0"
