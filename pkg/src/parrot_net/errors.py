"""Exceptions shared across modules."""


class ConfigError(ValueError):
    """A scenario, link budget, or campaign configuration is invalid."""
