class ConfigError(ValueError):
    """Invalid configuration value (bad site count, probability, mesh size...)."""


class DataError(ValueError):
    """Malformed or inconsistent input data (CSV rows, tables, annotations)."""
