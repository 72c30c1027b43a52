"""Exception hierarchy shared by every module, mapped to CLI exit codes."""


class SsdError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2


class UsageError(SsdError):
    """Caller misuse: bad arguments, mismatched shapes, wrong call order."""

    exit_code = 1


class DataError(SsdError):
    """Invalid data content: bad labels, impossible requests, empty views."""

    exit_code = 2


class FormatError(DataError):
    """Malformed file: broken CSV, bad lexicon syntax, unknown envelopes."""

    exit_code = 2


class ExternalServiceError(SsdError):
    """A remote service refused or failed the request."""

    exit_code = 3


class CredentialError(ExternalServiceError):
    """Authentication or authorization failure (HTTP 401/403)."""


class NetworkError(ExternalServiceError):
    """The remote endpoint could not be reached."""
