"""Shared exception hierarchy.

Every domain error raised by this package derives from :class:`PluricalcError`
so that callers (notably the CLI) can distinguish bad mathematical input from
programming errors.
"""


class PluricalcError(Exception):
    """Base class for all errors raised by pluricalc."""
