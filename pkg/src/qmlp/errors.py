"""Exception hierarchy shared by the library and the CLI.

Each error class carries a short category tag and the process exit code the
CLI maps it to. Library code raises these directly; the CLI formats them as
``error[<category>]: <message>`` on stderr.
"""


class QmlpError(Exception):
    category = "error"
    exit_code = 1


class ConfigurationError(QmlpError):
    """Bad architecture id, activation name, hyperparameter, or split setup."""

    category = "config"
    exit_code = 2


class DataError(QmlpError):
    """Unparseable or non-finite input data (bad cell, unknown category)."""

    category = "data"
    exit_code = 3


class FormatError(QmlpError):
    """Malformed file: wrong magic, version, column count, or truncation."""

    category = "format"
    exit_code = 3

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class InvariantError(QmlpError):
    """Internal contract violated: shape/params mismatch between components."""

    category = "invariant"
    exit_code = 4
