"""Error types; the CLI maps ConfigError to exit 2 and DataError to 3."""


class ConfigError(ValueError):
    """Invalid invocation: unknown kind, wrong input arity, bad flags."""


class DataError(ValueError):
    """Invalid input CSV: wrong schema tag, missing columns, no data."""
