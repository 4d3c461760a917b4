"""Error types shared across the package.

Exit-code mapping lives in the CLI: ConfigError -> 2, DataError -> 3.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad parameter values or inconsistent options."""


class DataError(ValueError):
    """Invalid input data: malformed CSV rows, bad schema, values out of range."""
